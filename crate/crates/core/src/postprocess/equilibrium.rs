use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Vec3, TOL_KNOT};
use crate::loads::Part;
use crate::solver::{LimitSolution, Material};
use crate::spaces::{Side, SkeletonField};

/// Knot equilibrium residual
/// `E Σ_i [(dU_E/ds(a_i−) − dU_E/ds(a_i+))·T_i] T_i − f_{A,E}`
/// over the arcs incident to `knot`, a missing side contributing zero.
///
/// A positive knot force pulls the end of an arc leaving through `a_i−`,
/// hence the left trace minus the right one.
pub fn knot_equilibrium_residual(
    u_e: &SkeletonField,
    material: &Material,
    knot: usize,
    f_ae: Vec3,
) -> Result<Vec3> {
    let mesh = u_e.mesh();
    let sk = mesh.skeleton();
    let k = sk
        .knots
        .get(knot)
        .ok_or_else(|| Error::InvalidInput(format!("no knot {knot}")))?;
    let mut sum = Vec3::zeros();
    for inc in &k.incidences {
        if mesh.vertex_at(inc.arc, inc.s).is_none() {
            return Err(Error::KnotNotMeshNode { knot, arc: inc.arc });
        }
        let geo = &sk.arcs[inc.arc];
        let l = geo.length();
        let t = geo.frame_at(inc.s)?.t;
        let at_start = inc.s <= TOL_KNOT * l;
        let at_end = inc.s >= l * (1.0 - TOL_KNOT);
        let left = if !at_start {
            u_e.eval_side(inc.arc, inc.s, Side::Left).1
        } else if geo.is_closed() {
            u_e.eval_side(inc.arc, l, Side::Left).1
        } else {
            Vec3::zeros()
        };
        let right = if !at_end {
            u_e.eval_side(inc.arc, inc.s, Side::Right).1
        } else if geo.is_closed() {
            u_e.eval_side(inc.arc, 0.0, Side::Right).1
        } else {
            Vec3::zeros()
        };
        sum += t * ((left - right).dot(&t) * material.young());
    }
    Ok(sum - f_ae)
}

#[derive(Debug, Clone, Serialize)]
pub struct KnotEquilibrium {
    pub knot: usize,
    pub force: [f64; 3],
    pub residual: [f64; 3],
    /// `|residual| / max(|force|, 1)`.
    pub relative: f64,
}

pub fn knot_equilibrium_table(sol: &LimitSolution) -> Result<Vec<KnotEquilibrium>> {
    (0..sol.skeleton().knots.len())
        .map(|k| {
            let f = sol.loads.knot_force(k, Part::Extensional);
            let r = knot_equilibrium_residual(&sol.u_e, &sol.material, k, f)?;
            Ok(KnotEquilibrium {
                knot: k,
                force: f.into(),
                residual: r.into(),
                relative: r.norm() / f.norm().max(1.0),
            })
        })
        .collect()
}
