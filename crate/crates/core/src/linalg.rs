//! Quadrature rules and the linear solvers shared by the discrete spaces and
//! the limit-problem solvers.
//!
//! Sparse operators are assembled as triplets and stored as CSR matrices.
//! Saddle-point systems are factored with a sparse LDLᵀ after a small static
//! regularization that makes them quasi-definite; iterative refinement against
//! the unregularized matrix recovers the exact solution.

use nalgebra::{DMatrix, DVector};
use sprs::{CsMat, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};

/// Gauss–Legendre rule mapped to `[0, 1]`: `(nodes, weights)`, weights sum to 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.abs() > 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Triplet accumulator producing a CSR matrix; duplicate entries are summed.
#[derive(Debug)]
pub struct SparseBuilder {
    tri: TriMat<f64>,
}

impl SparseBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            tri: TriMat::new((rows, cols)),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            self.tri.add_triplet(row, col, value);
        }
    }

    pub fn build(self) -> CsMat<f64> {
        self.tri.to_csr()
    }
}

pub fn spmv(mat: &CsMat<f64>, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(mat.cols(), x.len());
    let mut y = DVector::zeros(mat.rows());
    for (row, vec) in mat.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (col, &v) in vec.iter() {
            acc += v * x[col];
        }
        y[row] = acc;
    }
    y
}

/// `xᵀ A y` for a sparse `A`.
pub fn bilinear(mat: &CsMat<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.dot(&spmv(mat, y))
}

pub fn transpose(mat: &CsMat<f64>) -> CsMat<f64> {
    mat.transpose_view().to_csr()
}

pub fn to_dense(mat: &CsMat<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(mat.rows(), mat.cols());
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            d[(row, col)] += v;
        }
    }
    d
}

/// Largest relative asymmetry `max |A_ij - A_ji| / max |A_ij|`.
pub fn asymmetry(mat: &CsMat<f64>) -> f64 {
    let t = transpose(mat);
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for (row, vec) in mat.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            scale = scale.max(v.abs());
            let vt = t.get(row, col).copied().unwrap_or(0.0);
            worst = worst.max((v - vt).abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semidefinite matrix. Starting from zero, the iterates stay in the range of
/// the operator, so consistent singular systems converge to the minimum-norm
/// solution in the preconditioned metric.
pub fn conjugate_gradient(
    mat: &CsMat<f64>,
    rhs: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, CgStats)> {
    let n = rhs.len();
    let bnorm = rhs.norm();
    let mut x = DVector::zeros(n);
    if bnorm == 0.0 {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut inv_diag = DVector::from_element(n, 1.0);
    for (row, vec) in mat.outer_iterator().enumerate() {
        if let Some(&d) = vec.get(row) {
            if d > 0.0 {
                inv_diag[row] = 1.0 / d;
            }
        }
    }
    let mut r = rhs.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut best = 1.0;
    for it in 0..max_iter {
        let ap = spmv(mat, &p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            let res = r.norm() / bnorm;
            if res <= tol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        relative_residual: res,
                    },
                ));
            }
            return Err(Error::SingularInconsistent { residual: res });
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let res = r.norm() / bnorm;
        best = f64::min(best, res);
        if res <= tol {
            return Ok((
                x,
                CgStats {
                    iterations: it + 1,
                    relative_residual: res,
                },
            ));
        }
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + beta * &p;
    }
    // Recompute the true residual to tell a stalled consistent solve from an
    // inconsistent right-hand side.
    let res = (rhs - spmv(mat, &x)).norm() / bnorm;
    if best > 1e-3 {
        Err(Error::SingularInconsistent { residual: res })
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: res,
        })
    }
}

fn factor(mat: &CsMat<f64>) -> Result<LdlNumeric<f64, usize>> {
    let csc = mat.to_csc();
    Ldl::new()
        .check_symmetry(sprs::SymmetryCheck::DontCheckSymmetry)
        .fill_in_reduction(sprs::FillInReduction::ReverseCuthillMcKee)
        .numeric(csc.view())
        .map_err(|e| Error::SolverFailure(format!("{e:?}")))
}

/// Sparse LDLᵀ of a symmetric positive definite matrix.
pub struct SpdFactor {
    matrix: CsMat<f64>,
    ldl: LdlNumeric<f64, usize>,
}

impl SpdFactor {
    pub fn new(matrix: CsMat<f64>) -> Result<Self> {
        let ldl = factor(&matrix)?;
        if ldl.d().iter().any(|&d| d <= 0.0 || !d.is_finite()) {
            return Err(Error::SolverFailure(
                "matrix is not positive definite".into(),
            ));
        }
        Ok(Self { matrix, ldl })
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let x: Vec<f64> = self.ldl.solve(rhs.as_slice());
        let mut x = DVector::from_vec(x);
        // one refinement step
        let r = rhs - spmv(&self.matrix, &x);
        let dx: Vec<f64> = self.ldl.solve(r.as_slice());
        x += DVector::from_vec(dx);
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleStats {
    pub refinement_steps: usize,
    pub relative_residual: f64,
}

/// Symmetric indefinite system `[A Cᵀ; C 0]` with `n_primal` leading unknowns.
///
/// The factorization is computed on `[A + εI  Cᵀ; C  -εI]`, which is
/// quasi-definite whenever `A` is positive semidefinite, so LDLᵀ exists for
/// any symmetric ordering. The solution of the exact system is obtained by
/// iterative refinement.
///
/// When `A` is only semidefinite the small primal shift makes the pivots
/// cancel badly; [`SaddleFactor::augmented`] replaces `A` by `A + r CᵀC`,
/// which leaves the solution unchanged and is definite whenever
/// `ker A ∩ ker C = {0}`.
pub struct SaddleFactor {
    matrix: CsMat<f64>,
    ldl: LdlNumeric<f64, usize>,
    n_primal: usize,
    /// `(r, Cᵀ)` when augmented; the right side is shifted by `r Cᵀ g`.
    augment: Option<(f64, CsMat<f64>)>,
}

impl SaddleFactor {
    pub fn new(matrix: CsMat<f64>, n_primal: usize, regularization: f64) -> Result<Self> {
        let ldl = regularized_factor(&matrix, n_primal, regularization)?;
        Ok(Self {
            matrix,
            ldl,
            n_primal,
            augment: None,
        })
    }

    /// Augmented-Lagrangian variant; `r` is chosen so that `r CᵀC` has the
    /// magnitude of `A`.
    pub fn augmented(matrix: CsMat<f64>, n_primal: usize, regularization: f64) -> Result<Self> {
        let n = matrix.rows();
        let mut a = TriMat::new((n_primal, n_primal));
        let mut c = TriMat::new((n - n_primal, n_primal));
        for (row, vec) in matrix.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                if row < n_primal && col < n_primal {
                    a.add_triplet(row, col, v);
                } else if row >= n_primal && col < n_primal {
                    c.add_triplet(row - n_primal, col, v);
                }
            }
        }
        let a: CsMat<f64> = a.to_csr();
        let c: CsMat<f64> = c.to_csr();
        let ct = transpose(&c);
        let ctc = &ct * &c;
        let amax = a.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cmax = ctc.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let r = if amax > 0.0 && cmax > 0.0 { amax / cmax } else { 1.0 };
        let mut tri = TriMat::new((n, n));
        for (row, vec) in matrix.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                tri.add_triplet(row, col, v);
            }
        }
        for (row, vec) in ctc.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                tri.add_triplet(row, col, r * v);
            }
        }
        let aug: CsMat<f64> = tri.to_csr();
        let ldl = regularized_factor(&aug, n_primal, regularization)?;
        Ok(Self {
            matrix: aug,
            ldl,
            n_primal,
            augment: Some((r, ct)),
        })
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    pub fn solve(
        &self,
        rhs: &DVector<f64>,
        tol: f64,
        max_steps: usize,
    ) -> Result<(DVector<f64>, SaddleStats)> {
        let shifted;
        let rhs = match &self.augment {
            Some((r, ct)) => {
                let g = rhs.rows(self.n_primal, rhs.len() - self.n_primal).into_owned();
                let mut b = rhs.clone();
                let mut top = b.rows_mut(0, self.n_primal);
                top += spmv(ct, &g) * *r;
                shifted = b;
                &shifted
            }
            None => rhs,
        };
        let bnorm = rhs.norm();
        let mut x = DVector::zeros(rhs.len());
        if bnorm == 0.0 {
            return Ok((
                x,
                SaddleStats {
                    refinement_steps: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut r = rhs.clone();
        let mut res = 1.0;
        for step in 0..max_steps {
            let dx: Vec<f64> = self.ldl.solve(r.as_slice());
            x += DVector::from_vec(dx);
            r = rhs - spmv(&self.matrix, &x);
            let new_res = r.norm() / bnorm;
            if !new_res.is_finite() {
                break;
            }
            if new_res <= tol {
                return Ok((
                    x,
                    SaddleStats {
                        refinement_steps: step + 1,
                        relative_residual: new_res,
                    },
                ));
            }
            if step > 3 && new_res > 0.5 * res {
                res = new_res;
                break;
            }
            res = new_res;
        }
        Err(Error::SaddleSingular {
            cause: format!("iterative refinement stalled at relative residual {res:.3e}"),
        })
    }
}

fn regularized_factor(
    matrix: &CsMat<f64>,
    n_primal: usize,
    regularization: f64,
) -> Result<LdlNumeric<f64, usize>> {
    let n = matrix.rows();
    let scale = matrix
        .data()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let eps = regularization * scale;
    let mut tri = TriMat::new((n, n));
    for (row, vec) in matrix.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            tri.add_triplet(row, col, v);
        }
    }
    for i in 0..n {
        tri.add_triplet(i, i, if i < n_primal { eps } else { -eps });
    }
    let reg: CsMat<f64> = tri.to_csr();
    factor(&reg).map_err(|e| Error::SaddleSingular {
        cause: format!("regularized factorization failed: {e}"),
    })
}

/// Orthonormal basis (columns) of the null space of a dense matrix, using the
/// singular values relative to the largest one.
pub fn null_space(mat: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (m, n) = mat.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let size = m.max(n);
    let mut padded = DMatrix::zeros(size, n);
    padded.view_mut((0, 0), (m, n)).copy_from(mat);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= cut)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Sorted eigenvalues of the symmetric pencil `A x = λ M x` with `M` positive definite.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let sym_m = (m + m.transpose()) * 0.5;
    let chol = sym_m
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("norm Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let sym_a = (a + a.transpose()) * 0.5;
    let y = l
        .solve_lower_triangular(&sym_a)
        .ok_or_else(|| Error::SolverFailure("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::SolverFailure("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}
