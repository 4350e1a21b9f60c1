//! Continuous vector fields on the skeleton.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;

use super::mesh::{Side, SkeletonMesh};
use crate::error::Result;
use crate::geometry::Vec3;

/// A discrete element of the clamped H¹ space of the skeleton: three
/// components per free node, zero at clamped nodes, one value per knot.
#[derive(Debug, Clone)]
pub struct SkeletonField {
    mesh: Arc<SkeletonMesh>,
    dofs: DVector<f64>,
}

impl SkeletonField {
    pub fn zeros(mesh: &Arc<SkeletonMesh>) -> Self {
        Self {
            mesh: mesh.clone(),
            dofs: DVector::zeros(mesh.n_dofs()),
        }
    }

    pub fn from_dofs(mesh: &Arc<SkeletonMesh>, dofs: DVector<f64>) -> Self {
        assert_eq!(dofs.len(), mesh.n_dofs(), "dof vector length");
        Self {
            mesh: mesh.clone(),
            dofs,
        }
    }

    /// Nodal interpolant of `f(arc, s)`; clamped nodes are left at zero.
    pub fn interpolate(mesh: &Arc<SkeletonMesh>, f: impl Fn(usize, f64) -> Vec3) -> Self {
        let mut dofs = DVector::zeros(mesh.n_dofs());
        for free in 0..mesh.n_free_nodes() {
            let (arc, s) = mesh.free_node_location(free);
            let v = f(arc, s);
            for c in 0..3 {
                dofs[3 * free + c] = v[c];
            }
        }
        Self::from_dofs(mesh, dofs)
    }

    pub fn mesh(&self) -> &Arc<SkeletonMesh> {
        &self.mesh
    }

    pub fn dofs(&self) -> &DVector<f64> {
        &self.dofs
    }

    pub fn dofs_mut(&mut self) -> &mut DVector<f64> {
        &mut self.dofs
    }

    pub fn into_dofs(self) -> DVector<f64> {
        self.dofs
    }

    pub fn node_value(&self, node: usize) -> Vec3 {
        match self.mesh.node_free(node) {
            Some(f) => Vec3::new(self.dofs[3 * f], self.dofs[3 * f + 1], self.dofs[3 * f + 2]),
            None => Vec3::zeros(),
        }
    }

    /// Value and arclength derivative on element `e` at reference point `xi`.
    pub fn eval_element(&self, e: usize, xi: f64) -> (Vec3, Vec3) {
        let el = &self.mesh.elements()[e];
        let (n, dn) = self.mesh.order().shape(xi);
        let mut v = Vec3::zeros();
        let mut dv = Vec3::zeros();
        for (k, &node) in el.nodes.iter().enumerate() {
            let x = self.node_value(node);
            v += x * n[k];
            dv += x * dn[k];
        }
        (v, dv / el.h())
    }

    /// `(V(s), dV/ds(s))` on an arc; at element boundaries the derivative is
    /// taken from the element on `side`.
    pub fn eval_side(&self, arc: usize, s: f64, side: Side) -> (Vec3, Vec3) {
        let (e, xi) = self.mesh.locate(arc, s, side);
        self.eval_element(e, xi)
    }

    pub fn eval(&self, arc: usize, s: f64) -> (Vec3, Vec3) {
        self.eval_side(arc, s, Side::Right)
    }

    pub fn value(&self, arc: usize, s: f64) -> Vec3 {
        self.eval(arc, s).0
    }

    pub fn axpy(&mut self, a: f64, other: &SkeletonField) {
        self.dofs.axpy(a, &other.dofs, 1.0);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_dofs(&self.mesh, &self.dofs * a)
    }

    pub fn add(&self, other: &SkeletonField) -> Self {
        Self::from_dofs(&self.mesh, &self.dofs + &other.dofs)
    }

    pub fn sub(&self, other: &SkeletonField) -> Self {
        Self::from_dofs(&self.mesh, &self.dofs - &other.dofs)
    }

    /// Per-arc CSV `s,V1,V2,V3` at the nodes of `arc`, in increasing `s`.
    pub fn write_arc_csv(&self, arc: usize, out: &mut impl Write) -> Result<()> {
        writeln!(out, "s,V1,V2,V3")?;
        for (s, v) in self.arc_node_values(arc) {
            writeln!(out, "{s:e},{:e},{:e},{:e}", v[0], v[1], v[2])?;
        }
        Ok(())
    }

    /// `(s, V(s))` at every node lying on `arc`, ordered by `s`.
    pub fn arc_node_values(&self, arc: usize) -> Vec<(f64, Vec3)> {
        let mut out = vec![];
        for (k, el) in self.mesh.arc_elements(arc).iter().enumerate() {
            let locals = self.mesh.order().local_nodes();
            for (j, &node) in el.nodes.iter().enumerate() {
                if j == 0 && k > 0 {
                    continue;
                }
                out.push((el.s0 + el.h() * locals[j], self.node_value(node)));
            }
        }
        out
    }
}
