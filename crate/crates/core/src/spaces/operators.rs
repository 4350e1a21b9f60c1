//! Gram matrix, tangential-derivative operator, and the splitting into
//! inextensional and extensional parts.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use sprs::CsMat;

use super::field::SkeletonField;
use super::mesh::SkeletonMesh;
use crate::error::{Error, Result};
use crate::linalg::{self, SaddleFactor, SparseBuilder};

const SADDLE_REG: f64 = 1e-10;
const SADDLE_TOL: f64 = 1e-12;

/// `Σ_i ∫ dU/ds · dV/ds` on the clamped space.
pub fn gram_matrix(mesh: &SkeletonMesh) -> Result<CsMat<f64>> {
    if !mesh.is_clamped() {
        return Err(Error::NotClamped);
    }
    Ok(gram_matrix_semidefinite(mesh))
}

/// The same bilinear form without the clamping requirement (singular when
/// nothing is clamped).
pub fn gram_matrix_semidefinite(mesh: &SkeletonMesh) -> CsMat<f64> {
    let order = mesh.order();
    let locals: Vec<Vec<(usize, usize, f64)>> = mesh
        .elements()
        .par_iter()
        .map(|el| {
            let mut out = vec![];
            for q in &el.q2 {
                let (_, dn) = order.shape(q.xi);
                let h = el.h();
                for (a, &na) in el.nodes.iter().enumerate() {
                    for (b, &nb) in el.nodes.iter().enumerate() {
                        let v = q.weight * dn[a] * dn[b] / (h * h);
                        for c in 0..3 {
                            if let (Some(i), Some(j)) = (mesh.dof(na, c), mesh.dof(nb, c)) {
                                out.push((i, j, v));
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut b = SparseBuilder::new(mesh.n_dofs(), mesh.n_dofs());
    for (i, j, v) in locals.into_iter().flatten() {
        b.add(i, j, v);
    }
    b.build()
}

/// Row `2e + q` evaluates `dV/ds · T` at the `q`-th two-point Gauss node of
/// element `e`.
pub fn tangential_constraint(mesh: &SkeletonMesh) -> CsMat<f64> {
    let order = mesh.order();
    let mut b = SparseBuilder::new(2 * mesh.elements().len(), mesh.n_dofs());
    for (e, el) in mesh.elements().iter().enumerate() {
        for (k, q) in el.q2.iter().enumerate() {
            let (_, dn) = order.shape(q.xi);
            for (a, &na) in el.nodes.iter().enumerate() {
                for c in 0..3 {
                    if let Some(j) = mesh.dof(na, c) {
                        b.add(2 * e + k, j, dn[a] / el.h() * q.frame.t[c]);
                    }
                }
            }
        }
    }
    b.build()
}

/// Quadrature weights matching the rows of [`tangential_constraint`].
pub fn constraint_weights(mesh: &SkeletonMesh) -> DVector<f64> {
    DVector::from_iterator(
        2 * mesh.elements().len(),
        mesh.elements().iter().flat_map(|e| e.q2.iter().map(|q| q.weight)),
    )
}

/// `scale · Bᵀ W B`: the extensional bilinear form, whose kernel is exactly
/// the kernel of the tangential operator.
pub fn extensional_form(mesh: &SkeletonMesh, scale: f64) -> CsMat<f64> {
    let b = tangential_constraint(mesh);
    let w = constraint_weights(mesh);
    let mut wb = b.clone();
    for (row, mut vec) in wb.outer_iterator_mut().enumerate() {
        for (_, v) in vec.iter_mut() {
            *v *= scale * w[row];
        }
    }
    let bt = linalg::transpose(&b);
    &bt * &wb
}

/// `sqrt(Σ_i ∫ |dU/ds · T|²)`, a seminorm vanishing on the inextensional space.
pub fn extensional_norm(u: &SkeletonField) -> f64 {
    let mesh = u.mesh();
    let mut sum = 0.0;
    for (e, el) in mesh.elements().iter().enumerate() {
        for q in &el.q2 {
            let (_, d) = u.eval_element(e, q.xi);
            sum += q.weight * d.dot(&q.frame.t).powi(2);
        }
    }
    sum.sqrt()
}

/// K-norm `sqrt(Σ ∫ |dU/ds|²)`.
pub fn k_norm(u: &SkeletonField) -> f64 {
    let mesh = u.mesh();
    let mut sum = 0.0;
    for (e, el) in mesh.elements().iter().enumerate() {
        for q in &el.q2 {
            sum += q.weight * u.eval_element(e, q.xi).1.norm_squared();
        }
    }
    sum.sqrt()
}

/// K-orthogonal projector onto the kernel of the tangential operator.
///
/// The projection solves `min ‖U − Z‖_K` subject to `B Z = 0` through the
/// saddle system `[K Bᵀ; B 0]`, factored once.
pub struct DiProjector {
    mesh: Arc<SkeletonMesh>,
    k: CsMat<f64>,
    b: CsMat<f64>,
    factor: SaddleFactor,
}

impl DiProjector {
    pub fn new(mesh: &Arc<SkeletonMesh>) -> Result<Self> {
        let k = gram_matrix(mesh)?;
        let b = tangential_constraint(mesh);
        let n = mesh.n_dofs();
        let m = b.rows();
        let mut kkt = SparseBuilder::new(n + m, n + m);
        for (i, row) in k.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                kkt.add(i, j, v);
            }
        }
        for (r, row) in b.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                kkt.add(n + r, j, v);
                kkt.add(j, n + r, v);
            }
        }
        let factor = SaddleFactor::new(kkt.build(), n, SADDLE_REG).map_err(|e| match e {
            Error::SaddleSingular { cause } => Error::SolverFailure(cause),
            other => other,
        })?;
        Ok(Self {
            mesh: mesh.clone(),
            k,
            b,
            factor,
        })
    }

    pub fn gram(&self) -> &CsMat<f64> {
        &self.k
    }

    pub fn constraint(&self) -> &CsMat<f64> {
        &self.b
    }

    /// Project a dof vector; returns the inextensional part.
    pub fn project_dofs(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let n = u.len();
        let m = self.b.rows();
        let ku = linalg::spmv(&self.k, u);
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&ku);
        let (x, _) = self
            .factor
            .solve(&rhs, SADDLE_TOL, 40)
            .map_err(|e| Error::SolverFailure(e.to_string()))?;
        Ok(x.rows(0, n).into_owned())
    }

    /// `U = U_I + U_E` with `B U_I = 0` and `U_E` K-orthogonal to ker B.
    pub fn project(&self, u: &SkeletonField) -> Result<(SkeletonField, SkeletonField)> {
        let ui = self.project_dofs(u.dofs())?;
        let ue = u.dofs() - &ui;
        Ok((
            SkeletonField::from_dofs(&self.mesh, ui),
            SkeletonField::from_dofs(&self.mesh, ue),
        ))
    }
}

/// One-shot `project_DI`.
pub fn project_di(u: &SkeletonField) -> Result<(SkeletonField, SkeletonField)> {
    DiProjector::new(u.mesh())?.project(u)
}

/// Dense orthonormal basis of the discrete extensional space: the K-orthogonal
/// complement of ker B. Meant for small meshes (diagnostics and tests).
pub fn dense_extensional_basis(mesh: &SkeletonMesh, k: &DMatrix<f64>) -> DMatrix<f64> {
    let b = linalg::to_dense(&tangential_constraint(mesh));
    let z = linalg::null_space(&b, 1e-10);
    if z.ncols() == 0 {
        return DMatrix::identity(k.nrows(), k.nrows());
    }
    linalg::null_space(&(z.transpose() * k), 1e-10)
}

/// Constants `(c, C)` with `c ‖U‖_K ≤ ‖U‖_E ≤ C ‖U‖_K` on the discrete
/// extensional space, from the generalized eigenvalues of the two Gram
/// matrices restricted to it.
pub fn norm_equivalence(mesh: &SkeletonMesh) -> Result<(f64, f64)> {
    let k = linalg::to_dense(&gram_matrix(mesh)?);
    let a = linalg::to_dense(&extensional_form(mesh, 1.0));
    let basis = dense_extensional_basis(mesh, &k);
    let kr = basis.transpose() * &k * &basis;
    let ar = basis.transpose() * &a * &basis;
    let ev = linalg::generalized_eigenvalues(&ar, &kr)?;
    let lo = ev.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let hi = ev.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    Ok((lo, hi))
}

/// Coordinate text format: one `row col value` line per stored entry.
pub fn write_triplets(mat: &CsMat<f64>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "# {} {} {}", mat.rows(), mat.cols(), mat.nnz())?;
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            writeln!(out, "{row} {col} {v:e}")?;
        }
    }
    Ok(())
}
