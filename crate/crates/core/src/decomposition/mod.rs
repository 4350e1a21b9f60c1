//! Constructive decompositions of displacement fields sampled on thin tubes
//! around the skeleton: energies, elementary fits, rigid junctions,
//! unfolding and the measured estimate constants.

mod elementary;
mod energy;
mod estimates;
mod grid;

pub use elementary::{
    ball_samples, cutoff_m, elementary_decompose, grid_for, rigid_fit_ball, rigid_fit_dense,
    rigidify_junctions, ElementaryDisplacement, Rigid, Rigidified,
};
pub use energy::{energy_functionals, gradients, l2_squared, tube_jacobian, Energies};
pub use estimates::{estimate_report, estimate_row, EstimateOptions, EstimateReport, EstimateRow, FieldFamily};
pub use grid::{
    derivative_stencils, fd_weights, lagrange_derivative_matrix, physical_samples, refold,
    trig_derivative_matrix, unfold, Sample, TubeField, TubeFieldHeader, TubeGrid,
};

#[cfg(test)]
mod tests;
