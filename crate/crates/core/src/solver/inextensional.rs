use std::sync::Arc;

use nalgebra::{DVector, Matrix3};
use serde::Serialize;
use sprs::CsMat;

use super::{Material, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, SaddleFactor, SparseBuilder};
use crate::loads::{rhs_inextensional, LoadCase};
use crate::spaces::{pair_constraint_operator, KinematicPair, Order, SkeletonField, SkeletonMesh};

#[derive(Debug, Clone, Serialize)]
pub struct InextensionalDiagnostics {
    pub refinement_steps: usize,
    /// Relative residual of the full saddle system.
    pub saddle_residual: f64,
    /// Largest constraint defect at the collocation points, relative to the
    /// largest rotation magnitude.
    pub collocation_residual: f64,
    /// `L²` norm of `dV/ds − ℛ × T` relative to the pair norm.
    pub constraint_residual: f64,
    /// Largest knot rigidity defect over all knot incidences.
    pub knot_rigidity_defect: f64,
    pub energy: f64,
    pub work: f64,
}

/// Rotation stiffness on the linear rotation space:
/// `(E/3)[(ℛ'·N)(𝒜'·N) + (ℛ'·B)(𝒜'·B)] + (μ/3)(ℛ'·T)(𝒜'·T)`.
pub fn rotation_stiffness(mesh_a: &SkeletonMesh, material: &Material) -> CsMat<f64> {
    assert_eq!(mesh_a.order(), Order::P1);
    let bend = material.young() / 3.0;
    let twist = material.mu() / 3.0;
    let n = mesh_a.n_dofs();
    let mut kb = SparseBuilder::new(n, n);
    for el in mesh_a.elements() {
        let h = el.h();
        let mut m = Matrix3::zeros();
        for q in &el.q4 {
            let f = &q.frame;
            m += (f.n * f.n.transpose() + f.b * f.b.transpose()) * (bend * q.weight)
                + f.t * f.t.transpose() * (twist * q.weight);
        }
        let dn = [-1.0 / h, 1.0 / h];
        for (j, &nj) in el.nodes.iter().enumerate() {
            for (k, &nk) in el.nodes.iter().enumerate() {
                for c in 0..3 {
                    let Some(row) = mesh_a.dof(nj, c) else { continue };
                    for d in 0..3 {
                        if let Some(col) = mesh_a.dof(nk, d) {
                            kb.add(row, col, dn[j] * dn[k] * m[(c, d)]);
                        }
                    }
                }
            }
        }
    }
    kb.build()
}

/// Assembled saddle system `[[0, 0, Cᵥᵀ], [0, K, Cₐᵀ], [Cᵥ, Cₐ, 0]]` for the
/// unknowns `[V; ℛ; multipliers]`.
pub struct InextensionalSystem {
    pub mesh_v: Arc<SkeletonMesh>,
    pub mesh_a: Arc<SkeletonMesh>,
    pub stiffness: CsMat<f64>,
    pub constraint: CsMat<f64>,
    pub matrix: CsMat<f64>,
}

impl InextensionalSystem {
    pub fn new(mesh_v: &Arc<SkeletonMesh>, material: &Material) -> Result<Self> {
        let mesh_a = mesh_v.with_order(Order::P1)?;
        let stiffness = rotation_stiffness(&mesh_a, material);
        let constraint = pair_constraint_operator(mesh_v, &mesh_a);
        let nv = mesh_v.n_dofs();
        let np = nv + mesh_a.n_dofs();
        let m = constraint.rows();
        let mut kkt = SparseBuilder::new(np + m, np + m);
        for (i, row) in stiffness.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                kkt.add(nv + i, nv + j, v);
            }
        }
        for (r, row) in constraint.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                kkt.add(np + r, j, v);
                kkt.add(j, np + r, v);
            }
        }
        Ok(Self {
            mesh_v: mesh_v.clone(),
            mesh_a,
            stiffness,
            constraint,
            matrix: kkt.build(),
        })
    }

    pub fn n_primal(&self) -> usize {
        self.mesh_v.n_dofs() + self.mesh_a.n_dofs()
    }
}

/// Inextensional displacement and rotation field of the limit problem.
pub fn solve_inextensional(
    mesh_v: &Arc<SkeletonMesh>,
    material: &Material,
    loads: &LoadCase,
    config: &SolverConfig,
) -> Result<(KinematicPair, InextensionalDiagnostics)> {
    if !mesh_v.is_clamped() {
        return Err(Error::NotClamped);
    }
    if !unclamped_arcs(mesh_v).is_empty() {
        return Err(Error::SaddleSingular {
            cause: suspected_cause(mesh_v),
        });
    }
    let f = rhs_inextensional(loads, mesh_v, config.load_quadrature)?;
    let sys = InextensionalSystem::new(mesh_v, material)?;
    solve_system(&sys, &f, config)
}

pub fn solve_system(
    sys: &InextensionalSystem,
    f: &DVector<f64>,
    config: &SolverConfig,
) -> Result<(KinematicPair, InextensionalDiagnostics)> {
    let nv = sys.mesh_v.n_dofs();
    let na = sys.mesh_a.n_dofs();
    let np = nv + na;
    let total = sys.matrix.rows();
    let mut rhs = DVector::zeros(total);
    rhs.rows_mut(0, nv).copy_from(f);

    let factor = SaddleFactor::augmented(sys.matrix.clone(), np, config.saddle_regularization)?;
    let (x, stats) = factor
        .solve(&rhs, config.saddle_tol, config.saddle_max_steps)
        .map_err(|e| match e {
            Error::SaddleSingular { cause } => Error::SaddleSingular {
                cause: format!("{cause}; {}", suspected_cause(&sys.mesh_v)),
            },
            other => other,
        })?;

    let v = SkeletonField::from_dofs(&sys.mesh_v, x.rows(0, nv).into_owned());
    let a = SkeletonField::from_dofs(&sys.mesh_a, x.rows(nv, na).into_owned());
    let pair = KinematicPair::new(v, a)?;

    let rot = x.rows(nv, na).into_owned();
    let energy = linalg::bilinear(&sys.stiffness, &rot, &rot);
    let work = f.dot(&x.rows(0, nv));

    let amax = (0..sys.mesh_a.n_free_nodes())
        .map(|i| x.fixed_rows::<3>(nv + 3 * i).norm())
        .fold(0.0_f64, f64::max);
    let coll = pair.collocation_residual();
    let pnorm = pair.norm();
    let sk = sys.mesh_v.skeleton();
    let mut rigidity: f64 = 0.0;
    for knot in &sk.knots {
        for inc in &knot.incidences {
            rigidity = rigidity.max(pair.knot_rigidity_defect(inc.arc, inc.s)?);
        }
    }
    let diag = InextensionalDiagnostics {
        refinement_steps: stats.refinement_steps,
        saddle_residual: stats.relative_residual,
        collocation_residual: if amax > 0.0 { coll / amax } else { coll },
        constraint_residual: if pnorm > 0.0 {
            pair.constraint_residual() / pnorm
        } else {
            pair.constraint_residual()
        },
        knot_rigidity_defect: if amax > 0.0 { rigidity / amax } else { rigidity },
        energy,
        work,
    };
    Ok((pair, diag))
}

/// Heuristic explanation for a singular saddle system.
fn suspected_cause(mesh: &SkeletonMesh) -> String {
    match unclamped_arcs(mesh).first() {
        Some(arc) => format!("the component containing arc {arc} has no clamped end"),
        None => "redundant constraints".to_string(),
    }
}

/// Arcs whose connected component carries no clamped end.
pub fn unclamped_arcs(mesh: &SkeletonMesh) -> Vec<usize> {
    let sk = mesh.skeleton();
    let n = sk.arcs.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for k in &sk.knots {
        for w in k.incidences.windows(2) {
            let (a, b) = (find(&mut comp, w[0].arc), find(&mut comp, w[1].arc));
            comp[a] = b;
        }
    }
    let clamped: Vec<usize> = sk.clamped.iter().map(|c| find(&mut comp, c.arc)).collect();
    (0..n)
        .filter(|&i| {
            let r = find(&mut comp, i);
            !clamped.contains(&r)
        })
        .collect()
}
