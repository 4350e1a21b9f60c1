//! Strain energy `ℰ` and full gradient energy `𝒟` of sampled tube fields.

use nalgebra::Matrix3;
use serde::Serialize;

use super::grid::{derivative_stencils, lagrange_derivative_matrix, trig_derivative_matrix, TubeField};
use crate::error::Result;
use crate::geometry::{ArcGeometry, Frame, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    /// `∫ γ_kl γ_kl` with `γ` the symmetrized gradient.
    pub strain: f64,
    /// `∫ ∂u_k/∂x_l ∂u_k/∂x_l`.
    pub gradient: f64,
}

/// Jacobian of `Φ(s, y₂, y₃) = M(s) + y₂N(s) + y₃B(s)` with columns
/// `(∂/∂s, ∂/∂y₂, ∂/∂y₃)`:
/// `∂Φ/∂s = (1 − c y₂)T − τy₃N + τy₂B` by the Frenet formulas.
pub fn tube_jacobian(f: &Frame, y2: f64, y3: f64) -> Matrix3<f64> {
    let ds = f.t * (1.0 - f.curvature * y2) - f.n * (f.torsion * y3) + f.b * (f.torsion * y2);
    Matrix3::from_columns(&[ds, f.n, f.b])
}

/// Cartesian gradients `∂u_k/∂x_l` at every grid point together with the
/// volume weight of the point.
pub fn gradients(field: &TubeField, geo: &ArcGeometry) -> Result<Vec<(Matrix3<f64>, f64)>> {
    let g = &field.grid;
    g.check()?;
    let delta = field.delta;
    let radii = g.radii();
    let angles = g.angles();
    let (nr, nt) = (g.n_radial, g.n_angular);
    let dr = lagrange_derivative_matrix(&radii);
    let dt = trig_derivative_matrix(nt);
    let st = derivative_stencils(&g.s);
    let sw = g.s_weights();
    let dw = g.disc_weights();
    let mut out = Vec::with_capacity(g.len());
    for (is, &s) in g.s.iter().enumerate() {
        let f = geo.frame_at(s)?;
        let (start, w) = &st[is];
        for ir in 0..nr {
            for it in 0..nt {
                let r = radii[ir];
                let th = angles[it];
                let mut d_s = Vec3::zeros();
                for (k, wk) in w.iter().enumerate() {
                    d_s += field.values[g.index(start + k, ir, it)] * *wk;
                }
                let mut d_r = Vec3::zeros();
                for (k, wk) in dr[ir].iter().enumerate() {
                    d_r += field.values[g.index(is, k, it)] * *wk;
                }
                let mut d_t = Vec3::zeros();
                for (k, wk) in dt[it].iter().enumerate() {
                    d_t += field.values[g.index(is, ir, k)] * *wk;
                }
                // unfolded polar → physical transverse derivatives
                let (c, sn) = (th.cos(), th.sin());
                let d_y2 = (d_r * c - d_t * (sn / r)) / delta;
                let d_y3 = (d_r * sn + d_t * (c / r)) / delta;
                let (y2, y3) = (delta * r * c, delta * r * sn);
                let jac = tube_jacobian(&f, y2, y3);
                let jinv = jac.try_inverse().ok_or_else(|| {
                    crate::Error::DeltaTooLarge {
                        delta,
                        delta0: 1.0 / f.curvature.max(f64::MIN_POSITIVE),
                    }
                })?;
                let grad = Matrix3::from_columns(&[d_s, d_y2, d_y3]) * jinv;
                let vol = sw[is] * dw[g.index(0, ir, it)] * delta * delta * jac.determinant().abs();
                out.push((grad, vol));
            }
        }
    }
    Ok(out)
}

pub fn energy_functionals(field: &TubeField, geo: &ArcGeometry) -> Result<Energies> {
    let mut e = Energies {
        strain: 0.0,
        gradient: 0.0,
    };
    for (g, w) in gradients(field, geo)? {
        let sym = (g + g.transpose()) * 0.5;
        e.strain += w * sym.norm_squared();
        e.gradient += w * g.norm_squared();
    }
    Ok(e)
}

/// `∫_ω |u|²` over the physical tube.
pub fn l2_squared(field: &TubeField, geo: &ArcGeometry) -> Result<f64> {
    let g = &field.grid;
    let sw = g.s_weights();
    let dw = g.disc_weights();
    let disc = g.disc_points();
    let mut sum = 0.0;
    for (is, &s) in g.s.iter().enumerate() {
        let c = geo.frame_at(s)?.curvature;
        for (j, &(y2, _)) in disc.iter().enumerate() {
            let jac = 1.0 - c * field.delta * y2;
            let u = field.values[is * disc.len() + j];
            sum += sw[is] * dw[j] * field.delta * field.delta * jac * u.norm_squared();
        }
    }
    Ok(sum)
}
