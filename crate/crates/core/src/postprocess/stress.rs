use nalgebra::Matrix3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::LimitSolution;
use crate::spaces::Side;

/// Limit stress in the local basis `(T, N, B)` at `(s, Y₂, Y₃)`, with
/// `(Y₂, Y₃)` in the unit disc.
///
/// Second derivatives of `U_I` are replaced by rotation derivatives:
/// `d²U_I/ds²·N = dℛ/ds·B`, `d²U_I/ds²·B − cΘ = −dℛ/ds·N` and
/// `c dU_I/ds·B + dΘ/ds = dℛ/ds·T`.
pub fn limit_stress(sol: &LimitSolution, arc: usize, s: f64, y2: f64, y3: f64) -> Result<Matrix3<f64>> {
    let (axial, bend_n, bend_b, twist) = strain_measures(sol, arc, s)?;
    if y2 * y2 + y3 * y3 > 1.0 + 1e-12 {
        return Err(Error::OutOfRange {
            what: "cross-section radius",
            value: y2.hypot(y3),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(stress_from_measures(sol.material.young(), sol.material.mu(), axial, bend_n, bend_b, twist, y2, y3))
}

/// `(dU_E/ds·T, dℛ/ds·N, dℛ/ds·B, dℛ/ds·T)` at `s`. Element-wise constant
/// quantities are taken from the element to the right of a node.
pub fn strain_measures(sol: &LimitSolution, arc: usize, s: f64) -> Result<(f64, f64, f64, f64)> {
    let geo = sol.skeleton().arc(arc)?;
    let l = geo.length();
    if !(0.0..=l * (1.0 + 1e-12)).contains(&s) {
        return Err(Error::OutOfRange {
            what: "abscissa",
            value: s,
            lo: 0.0,
            hi: l,
        });
    }
    let side = if s >= l { Side::Left } else { Side::Right };
    let f = geo.frame_at(s)?;
    let (_, due) = sol.u_e.eval_side(arc, s, side);
    let (_, dr) = sol.pair.a.eval_side(arc, s, side);
    Ok((due.dot(&f.t), dr.dot(&f.n), dr.dot(&f.b), dr.dot(&f.t)))
}

#[allow(clippy::too_many_arguments)]
pub fn stress_from_measures(
    young: f64,
    mu: f64,
    axial: f64,
    bend_n: f64,
    bend_b: f64,
    twist: f64,
    y2: f64,
    y3: f64,
) -> Matrix3<f64> {
    let s11 = young * (axial - y2 * bend_b + y3 * bend_n);
    let s12 = -0.5 * mu * y3 * twist;
    let s13 = 0.5 * mu * y2 * twist;
    Matrix3::new(s11, s12, s13, s12, 0.0, 0.0, s13, 0.0, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct StressSample {
    pub arc: usize,
    pub s: f64,
    pub y2: f64,
    pub y3: f64,
    pub sigma: [[f64; 3]; 3],
}

/// Stresses on a polar lattice of the unit disc at every displacement node:
/// the centroid plus `n_radial` rings of `n_angular` points.
pub fn stress_grid(sol: &LimitSolution, n_radial: usize, n_angular: usize) -> Result<Vec<StressSample>> {
    let mut out = vec![];
    let mut points = vec![(0.0, 0.0)];
    for k in 1..=n_radial {
        let r = k as f64 / n_radial as f64;
        for j in 0..n_angular {
            let t = std::f64::consts::TAU * j as f64 / n_angular as f64;
            points.push((r * t.cos(), r * t.sin()));
        }
    }
    for arc in 0..sol.skeleton().arcs.len() {
        for (s, _) in sol.u_e.arc_node_values(arc) {
            for &(y2, y3) in &points {
                let m = limit_stress(sol, arc, s, y2, y3)?;
                out.push(StressSample {
                    arc,
                    s,
                    y2,
                    y3,
                    sigma: m.transpose().into(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_extension_and_pure_torsion() {
        let m = stress_from_measures(2.5, 1.0, 0.1, 0.0, 0.0, 0.0, 0.3, -0.4);
        assert_eq!(m[(0, 0)], 0.25);
        assert_eq!(m[(0, 1)], 0.0);
        let t = stress_from_measures(2.5, 1.0, 0.0, 0.0, 0.0, 0.2, 0.3, -0.4);
        assert_eq!(t[(0, 0)], 0.0);
        assert!((t[(0, 1)] - 0.04).abs() < 1e-16);
        assert!((t[(0, 2)] - 0.03).abs() < 1e-16);
        assert_eq!(t, t.transpose());
    }

    #[test]
    fn resultants_over_the_unit_disc() {
        // polar Gauss rule, exact for the polynomials involved
        let (r, wr) = crate::linalg::gauss_legendre(4);
        let n_t = 16;
        let (young, mu) = (2.5, 1.0);
        let (a, bn, bb, tw) = (0.3, -0.7, 0.45, 1.3);
        let (mut axial, mut moment) = (0.0, 0.0);
        for (ri, wi) in r.iter().zip(&wr) {
            for j in 0..n_t {
                let t = std::f64::consts::TAU * j as f64 / n_t as f64;
                let (y2, y3) = (ri * t.cos(), ri * t.sin());
                let w = wi * ri * std::f64::consts::TAU / n_t as f64;
                let m = stress_from_measures(young, mu, a, bn, bb, tw, y2, y3);
                axial += w * m[(0, 0)];
                moment += w * (y2 * m[(0, 2)] - y3 * m[(0, 1)]);
            }
        }
        let pi = std::f64::consts::PI;
        assert!((axial - pi * young * a).abs() < 1e-12);
        assert!((moment - mu * pi / 4.0 * tw).abs() < 1e-12);
    }
}
