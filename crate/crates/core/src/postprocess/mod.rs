//! Limit stresses, the knot equilibrium law and result export.

mod equilibrium;
mod export;
mod stress;

pub use equilibrium::{knot_equilibrium_residual, knot_equilibrium_table, KnotEquilibrium};
pub use export::{
    arc_rows, export_solution, read_arc_csv, summary, write_arc_csv, write_polyline, ArcRow,
    Energies, ExportOptions, MeshSummary, Summary, ARC_CSV_HEADER, POLYLINE_HEADER,
};
pub use stress::{limit_stress, strain_measures, stress_from_measures, stress_grid, StressSample};
