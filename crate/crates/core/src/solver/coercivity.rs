use nalgebra::DMatrix;
use serde::Serialize;

use super::inextensional::rotation_stiffness;
use super::Material;
use crate::error::Result;
use crate::linalg::{self, SparseBuilder};
use crate::spaces::{
    dense_extensional_basis, extensional_form, gram_matrix_semidefinite, pair_constraint_operator,
    Order, SkeletonMesh,
};
use sprs::CsMat;

/// Relative threshold under which a generalized eigenvalue counts as zero.
const ZERO_MODE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub clamped: bool,
    /// Smallest eigenvalue of the extensional form on the extensional space
    /// against the H¹ seminorm (plus the L² norm when nothing is clamped).
    pub extensional_min: f64,
    /// Smallest eigenvalue of the rotation energy on constrained pairs
    /// against `Σ ∫ |d𝒜/ds|²` (plus L² norms when nothing is clamped).
    pub inextensional_min: f64,
    pub extensional_zero_modes: usize,
    pub inextensional_zero_modes: usize,
}

/// `Σ ∫ U·V`, four-point rule.
pub fn mass_matrix(mesh: &SkeletonMesh) -> CsMat<f64> {
    let order = mesh.order();
    let n = mesh.n_dofs();
    let mut b = SparseBuilder::new(n, n);
    for el in mesh.elements() {
        for q in &el.q4 {
            let (v, _) = order.shape(q.xi);
            for (a, &na) in el.nodes.iter().enumerate() {
                for (c, &nc) in el.nodes.iter().enumerate() {
                    for d in 0..3 {
                        if let (Some(i), Some(j)) = (mesh.dof(na, d), mesh.dof(nc, d)) {
                            b.add(i, j, q.weight * v[a] * v[c]);
                        }
                    }
                }
            }
        }
    }
    b.build()
}

/// Dense generalized eigenvalue estimates for both limit forms. Intended for
/// small meshes.
pub fn coercivity_check(mesh_v: &SkeletonMesh, material: &Material) -> Result<CoercivityReport> {
    let clamped = mesh_v.is_clamped();
    let k = linalg::to_dense(&gram_matrix_semidefinite(mesh_v));
    let mass_v = linalg::to_dense(&mass_matrix(mesh_v));
    let norm_v = if clamped { k.clone() } else { &k + &mass_v };

    let a = linalg::to_dense(&extensional_form(mesh_v, material.young()));
    let d = dense_extensional_basis(mesh_v, &k);
    let ev_e = linalg::generalized_eigenvalues(
        &(d.transpose() * &a * &d),
        &(d.transpose() * &norm_v * &d),
    )?;

    let mesh_a = mesh_v.with_order(Order::P1)?;
    let nv = mesh_v.n_dofs();
    let na = mesh_a.n_dofs();
    let c = linalg::to_dense(&pair_constraint_operator(mesh_v, &mesh_a));
    let z = linalg::null_space(&c, 1e-10);
    let mut stiff = DMatrix::zeros(nv + na, nv + na);
    stiff
        .view_mut((nv, nv), (na, na))
        .copy_from(&linalg::to_dense(&rotation_stiffness(&mesh_a, material)));
    let mut norm = DMatrix::zeros(nv + na, nv + na);
    let grad_a = linalg::to_dense(&gram_matrix_semidefinite(&mesh_a));
    if clamped {
        norm.view_mut((nv, nv), (na, na)).copy_from(&grad_a);
    } else {
        let mass_a = linalg::to_dense(&mass_matrix(&mesh_a));
        norm.view_mut((0, 0), (nv, nv)).copy_from(&mass_v);
        norm.view_mut((nv, nv), (na, na)).copy_from(&(grad_a + mass_a));
    }
    let ev_i = linalg::generalized_eigenvalues(
        &(z.transpose() * &stiff * &z),
        &(z.transpose() * &norm * &z),
    )?;

    let summary = |ev: &[f64]| -> (f64, usize) {
        let top = ev.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
        let zeros = ev.iter().filter(|&&x| x <= ZERO_MODE * top).count();
        (ev.first().copied().unwrap_or(0.0), zeros)
    };
    let (extensional_min, extensional_zero_modes) = summary(&ev_e);
    let (inextensional_min, inextensional_zero_modes) = summary(&ev_i);
    Ok(CoercivityReport {
        clamped,
        extensional_min,
        inextensional_min,
        extensional_zero_modes,
        inextensional_zero_modes,
    })
}
