use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use super::{ExtensionalSolver, Material, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, SparseBuilder, SpdFactor};
use crate::loads::{rhs_extensional, LoadCase};
use crate::spaces::{extensional_form, gram_matrix, DiProjector, SkeletonField, SkeletonMesh};

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionalDiagnostics {
    pub iterations: usize,
    /// Relative residual reported by the linear solver.
    pub solver_residual: f64,
    /// `max_j |a(U_E, φ_j) − g(φ_j)| / max_j |g(φ_j)|` over all basis functions.
    pub galerkin_residual: f64,
    /// `‖P_I U_E‖_K / ‖U_E‖_K`.
    pub orthogonality_defect: f64,
    pub energy: f64,
    pub work: f64,
}

/// Extensional limit displacement for an orthogonality-checked load case.
pub fn solve_extensional(
    mesh: &Arc<SkeletonMesh>,
    material: &Material,
    loads: &LoadCase,
    config: &SolverConfig,
) -> Result<(SkeletonField, ExtensionalDiagnostics)> {
    if !mesh.is_clamped() {
        return Err(Error::NotClamped);
    }
    let g = rhs_extensional(loads, mesh, config.load_quadrature)?;
    let a = extensional_form(mesh, material.young());
    let projector = DiProjector::new(mesh)?;
    solve_with(mesh, &a, &g, &projector, config)
}

/// Same as [`solve_extensional`] with the operators supplied by the caller,
/// so several load cases can share them.
pub fn solve_with(
    mesh: &Arc<SkeletonMesh>,
    a: &sprs::CsMat<f64>,
    g: &DVector<f64>,
    projector: &DiProjector,
    config: &SolverConfig,
) -> Result<(SkeletonField, ExtensionalDiagnostics)> {
    let n = mesh.n_dofs();
    let (x, iterations, solver_residual) = match config.extensional_solver {
        ExtensionalSolver::Cg => {
            let max_iter = if config.cg_max_iter == 0 { 10 * n.max(1) } else { config.cg_max_iter };
            let (x, st) = linalg::conjugate_gradient(a, g, config.cg_tol, max_iter)?;
            (x, st.iterations, st.relative_residual)
        }
        ExtensionalSolver::Direct => shifted_direct(mesh, a, g, config)?,
    };
    let xi = projector.project_dofs(&x)?;
    let ue = &x - &xi;

    let r = linalg::spmv(a, &ue) - g;
    let gmax = g.amax();
    let galerkin_residual = if gmax > 0.0 { r.amax() / gmax } else { r.amax() };
    let k = projector.gram();
    let ue_k = linalg::bilinear(k, &ue, &ue).max(0.0).sqrt();
    let pi = projector.project_dofs(&ue)?;
    let orthogonality_defect = if ue_k > 0.0 {
        linalg::bilinear(k, &pi, &pi).max(0.0).sqrt() / ue_k
    } else {
        0.0
    };
    let diag = ExtensionalDiagnostics {
        iterations,
        solver_residual,
        galerkin_residual,
        orthogonality_defect,
        energy: linalg::bilinear(a, &ue, &ue),
        work: g.dot(&ue),
    };
    Ok((SkeletonField::from_dofs(mesh, ue), diag))
}

fn shifted_direct(
    mesh: &SkeletonMesh,
    a: &sprs::CsMat<f64>,
    g: &DVector<f64>,
    config: &SolverConfig,
) -> Result<(DVector<f64>, usize, f64)> {
    let k = gram_matrix(mesh)?;
    let amax = a.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let kmax = k.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let eps = 1e-8 * amax.max(f64::MIN_POSITIVE) / kmax.max(f64::MIN_POSITIVE);
    let mut shifted = SparseBuilder::new(a.rows(), a.cols());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            shifted.add(i, j, v);
        }
    }
    for (i, row) in k.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            shifted.add(i, j, eps * v);
        }
    }
    let f = SpdFactor::new(shifted.build())?;
    let gn = g.norm();
    let mut x = DVector::zeros(g.len());
    if gn == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut res = f64::INFINITY;
    for step in 1..=config.saddle_max_steps {
        let r = g - linalg::spmv(a, &x);
        let rel = r.norm() / gn;
        if rel <= config.cg_tol {
            return Ok((x, step - 1, rel));
        }
        if step > 4 && rel > 0.5 * res {
            return Err(Error::SingularInconsistent { residual: rel });
        }
        res = rel;
        x += f.solve(&r);
    }
    let rel = (g - linalg::spmv(a, &x)).norm() / gn;
    if rel <= config.cg_tol {
        Ok((x, config.saddle_max_steps, rel))
    } else {
        Err(Error::NoConvergence {
            iterations: config.saddle_max_steps,
            residual: rel,
        })
    }
}
