//! Constrained pairs `(V, 𝒜)` with `dV/ds = 𝒜 × T` on every arc.

use std::sync::Arc;

use sprs::CsMat;

use super::field::SkeletonField;
use super::mesh::{Order, Side, SkeletonMesh};
use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, Vec3, TOL_KNOT};
use crate::linalg::SparseBuilder;

/// Displacement `V` (quadratic) with rotation field `𝒜` (linear) on the same
/// element partition.
#[derive(Debug, Clone)]
pub struct KinematicPair {
    pub v: SkeletonField,
    pub a: SkeletonField,
}

impl KinematicPair {
    pub fn new(v: SkeletonField, a: SkeletonField) -> Result<Self> {
        if v.mesh().elements().len() != a.mesh().elements().len() {
            return Err(Error::InvalidInput(
                "displacement and rotation meshes differ".into(),
            ));
        }
        Ok(Self { v, a })
    }

    pub fn zeros(mesh_v: &Arc<SkeletonMesh>, mesh_a: &Arc<SkeletonMesh>) -> Self {
        Self {
            v: SkeletonField::zeros(mesh_v),
            a: SkeletonField::zeros(mesh_a),
        }
    }

    /// Torsion angle `Θ = 𝒜 · T`.
    pub fn theta(&self, arc: usize, s: f64) -> Result<f64> {
        let f = self.v.mesh().skeleton().arcs[arc].frenet(s)?;
        Ok(self.a.value(arc, s).dot(&f.t))
    }

    /// `sqrt(Σ_i ∫ |d𝒜/ds|²)`.
    pub fn norm(&self) -> f64 {
        let mesh = self.a.mesh();
        let mut sum = 0.0;
        for (e, el) in mesh.elements().iter().enumerate() {
            for q in &el.q2 {
                sum += q.weight * self.a.eval_element(e, q.xi).1.norm_squared();
            }
        }
        sum.sqrt()
    }

    /// `L²` norm of `dV/ds − 𝒜 × T` over the skeleton (four-point rule).
    pub fn constraint_residual(&self) -> f64 {
        let mesh = self.v.mesh();
        let mut sum = 0.0;
        for (e, el) in mesh.elements().iter().enumerate() {
            for q in &el.q4 {
                let (_, dv) = self.v.eval_element(e, q.xi);
                let (a, _) = self.a.eval_element(e, q.xi);
                sum += q.weight * (dv - a.cross(&q.frame.t)).norm_squared();
            }
        }
        sum.sqrt()
    }

    /// Largest defect of the constraint at the collocation points where the
    /// discrete problem imposes it.
    pub fn collocation_residual(&self) -> f64 {
        let mesh = self.v.mesh();
        let mut worst: f64 = 0.0;
        for (e, el) in mesh.elements().iter().enumerate() {
            for q in &el.q2 {
                let (_, dv) = self.v.eval_element(e, q.xi);
                let (a, _) = self.a.eval_element(e, q.xi);
                worst = worst.max((dv - a.cross(&q.frame.t)).norm());
            }
        }
        worst
    }

    /// Largest `|dV/ds(a±) − 𝒜(a) × T(a)|` over the one-sided derivatives at `a`.
    pub fn knot_rigidity_defect(&self, arc: usize, s: f64) -> Result<f64> {
        let f = self.v.mesh().skeleton().arcs[arc].frenet(s)?;
        let a = self.a.value(arc, s);
        let mut worst: f64 = 0.0;
        let l = self.v.mesh().skeleton().arcs[arc].length();
        for side in [Side::Left, Side::Right] {
            if (side == Side::Left && s <= TOL_KNOT * l) || (side == Side::Right && s >= l * (1.0 - TOL_KNOT)) {
                continue;
            }
            let (_, dv) = self.v.eval_side(arc, s, side);
            worst = worst.max((dv - a.cross(&f.t)).norm());
        }
        Ok(worst)
    }
}

/// Constraint operator on the stacked unknowns `[V; 𝒜]`: three rows per
/// two-point Gauss node, `w_q (dV/ds − 𝒜 × T)(q)`.
pub fn pair_constraint_operator(mesh_v: &SkeletonMesh, mesh_a: &SkeletonMesh) -> CsMat<f64> {
    assert_eq!(mesh_v.order(), Order::P2);
    assert_eq!(mesh_a.order(), Order::P1);
    let nv = mesh_v.n_dofs();
    let rows = 6 * mesh_v.elements().len();
    let mut b = SparseBuilder::new(rows, nv + mesh_a.n_dofs());
    for (e, (ev, ea)) in mesh_v.elements().iter().zip(mesh_a.elements()).enumerate() {
        for (k, q) in ev.q2.iter().enumerate() {
            let row0 = 6 * e + 3 * k;
            let w = q.weight;
            let (_, dn) = Order::P2.shape(q.xi);
            for (j, &node) in ev.nodes.iter().enumerate() {
                for c in 0..3 {
                    if let Some(col) = mesh_v.dof(node, c) {
                        b.add(row0 + c, col, w * dn[j] / ev.h());
                    }
                }
            }
            // −𝒜 × T = [T]ₓ 𝒜
            let t = q.frame.t;
            let tx = [
                [0.0, -t[2], t[1]],
                [t[2], 0.0, -t[0]],
                [-t[1], t[0], 0.0],
            ];
            let (n1, _) = Order::P1.shape(q.xi);
            for (j, &node) in ea.nodes.iter().enumerate() {
                for d in 0..3 {
                    if let Some(col) = mesh_a.dof(node, d) {
                        for c in 0..3 {
                            if tx[c][d] != 0.0 {
                                b.add(row0 + c, nv + col, w * n1[j] * tx[c][d]);
                            }
                        }
                    }
                }
            }
        }
    }
    b.build()
}

/// Defects of the three reduction identities for a constrained pair given by
/// closures, evaluated with central differences of step `h` at `s`:
///
/// `V''·N − 𝒜'·B`, `V''·B − cΘ + 𝒜'·N`, `Θ' + c V'·B − 𝒜'·T`.
pub fn reduction_identity_defects(
    arc: &ArcGeometry,
    v: impl Fn(f64) -> Vec3,
    a: impl Fn(f64) -> Vec3,
    s: f64,
    h: f64,
) -> Result<[f64; 3]> {
    let f = arc.frenet(s)?;
    let theta = |x: f64| -> Result<f64> { Ok(a(x).dot(&arc.frenet(x)?.t)) };
    let v2 = (v(s + h) - v(s) * 2.0 + v(s - h)) / (h * h);
    let v1 = (v(s + h) - v(s - h)) / (2.0 * h);
    let a1 = (a(s + h) - a(s - h)) / (2.0 * h);
    let th1 = (theta(s + h)? - theta(s - h)?) / (2.0 * h);
    let c = f.curvature;
    Ok([
        v2.dot(&f.n) - a1.dot(&f.b),
        v2.dot(&f.b) - c * theta(s)? + a1.dot(&f.n),
        th1 + c * v1.dot(&f.b) - a1.dot(&f.t),
    ])
}
