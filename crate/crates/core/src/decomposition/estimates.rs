//! Synthetic displacement families and the tables of estimate ratios.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::elementary::{elementary_decompose, grid_for, rigidify_junctions, ElementaryDisplacement};
use super::energy::{energy_functionals, l2_squared};
use super::grid::TubeField;
use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, Skeleton, Vec3};
use crate::spaces::{k_norm, DiProjector, Order, SkeletonField, SkeletonMesh};

/// Synthetic displacement families. The first three are written in the local
/// frame of each arc and vanish at `s = 0`; they are continuous across knots
/// only on single-arc skeletons. `Cartesian` and `Rigid` are smooth fields of
/// `x` and suit any skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FieldFamily {
    /// `ε s T − νε (y₂N + y₃B)`.
    Extension { strain: f64, poisson: f64 },
    /// `κ (s²/2 N − y₂ s T) + νκ ((y₂² − y₃²)/2 N + y₂y₃ B)`.
    Bending { curvature: f64, poisson: f64 },
    /// `φ s (y₂B − y₃N)` plus a warping `w y₂y₃(y₂² − y₃²) T` that is not
    /// elementary.
    Torsion { twist: f64, warping: f64 },
    /// `G x + κ (x₁²/2 e₂ − x₁x₂ e₁) + νκ ((x₂² − x₃²)/2 e₂ + x₂x₃ e₃)`.
    Cartesian { grad: [[f64; 3]; 3], bending: f64, poisson: f64 },
    /// `a + b × x`.
    Rigid { a: [f64; 3], b: [f64; 3] },
}

impl FieldFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Extension { .. } => "extension",
            Self::Bending { .. } => "bending",
            Self::Torsion { .. } => "torsion",
            Self::Cartesian { .. } => "cartesian",
            Self::Rigid { .. } => "rigid",
        }
    }

    pub fn eval(&self, geo: &ArcGeometry, s: f64, y2: f64, y3: f64, x: Vec3) -> Result<Vec3> {
        let f = geo.frame_at(s)?;
        Ok(match *self {
            Self::Extension { strain, poisson } => {
                f.t * (strain * s) - (f.n * y2 + f.b * y3) * (poisson * strain)
            }
            Self::Bending { curvature, poisson } => {
                (f.n * (s * s / 2.0) - f.t * (y2 * s)) * curvature
                    + (f.n * ((y2 * y2 - y3 * y3) / 2.0) + f.b * (y2 * y3)) * (poisson * curvature)
            }
            Self::Torsion { twist, warping } => {
                (f.b * y2 - f.n * y3) * (twist * s) + f.t * (warping * y2 * y3 * (y2 * y2 - y3 * y3))
            }
            Self::Cartesian { grad, bending, poisson } => {
                let g = nalgebra::Matrix3::from_fn(|i, j| grad[i][j]);
                let (x1, x2, x3) = (x[0], x[1], x[2]);
                g * x
                    + Vec3::new(-x1 * x2, x1 * x1 / 2.0, 0.0) * bending
                    + Vec3::new(0.0, (x2 * x2 - x3 * x3) / 2.0, x2 * x3) * (poisson * bending)
            }
            Self::Rigid { a, b } => Vec3::from(a) + Vec3::from(b).cross(&x),
        })
    }

    pub fn sample(&self, geo: &ArcGeometry, delta: f64, n_radial: usize, n_angular: usize) -> Result<TubeField> {
        let grid = grid_for(geo, delta, n_radial, n_angular);
        let err = std::cell::RefCell::new(None);
        let field = TubeField::sample(geo, delta, grid, |s, y2, y3, x| {
            self.eval(geo, s, y2, y3, x).unwrap_or_else(|e| {
                *err.borrow_mut() = Some(e);
                Vec3::zeros()
            })
        });
        match err.into_inner() {
            Some(e) => Err(e),
            None => field,
        }
    }
}

/// One row of the estimate table. Every `*_ratio` divides by the strain
/// energy `ℰ(u)` scaled as in the corresponding estimate, and is 0 when both
/// numerator and `ℰ` vanish at rounding level (relative to `𝒟(u)`).
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub delta: f64,
    pub strain_energy: f64,
    pub gradient_energy: f64,
    /// Per-rod fit: `𝒟(u − U′_e)/ℰ`.
    pub rod_gradient_ratio: f64,
    /// Per-rod fit: `‖u − U′_e‖² / (δ²ℰ)`.
    pub rod_l2_ratio: f64,
    /// Per-rod fit: `δ² (δ²‖dℛ′/ds‖² + ‖d𝒰′/ds − ℛ′×T‖²) / ℰ`.
    pub rod_line_ratio: f64,
    /// Effect of rigidification: `(‖𝒰 − 𝒰′‖² + δ²‖d(𝒰 − 𝒰′)/ds‖² + δ²‖ℛ − ℛ′‖²) / ℰ`.
    pub blend_ratio: f64,
    /// Structure fit: `𝒟(u − U_e)/ℰ`.
    pub structure_gradient_ratio: f64,
    /// Structure fit: `‖u − U_e‖² / (δ²ℰ)`.
    pub structure_l2_ratio: f64,
    /// Structure fit: `δ² (δ²‖dℛ/ds‖² + ‖d𝒰/ds − ℛ×T‖²) / ℰ`.
    pub structure_line_ratio: f64,
    /// Clamped structures only: `δ² (‖U_E‖² + δ²‖U_I‖² + ‖dU_I/ds − ℛ×T‖²) / ℰ`
    /// after splitting `𝒰 = U_I + U_E` (H¹ seminorms).
    pub splitting_ratio: Option<f64>,
    /// `max |𝒰|` over clamped ends relative to `max |𝒰|`; the estimates assume
    /// fields that vanish on the clamped faces, so this should be near zero.
    pub clamp_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub family: Option<FieldFamily>,
    pub rows: Vec<EstimateRow>,
    /// Names of the ratio columns that grow at every step as δ decreases.
    pub growing: Vec<String>,
}

impl EstimateReport {
    /// Rows are sorted by decreasing thickness and scanned for growth.
    pub fn new(family: Option<FieldFamily>, mut rows: Vec<EstimateRow>) -> Self {
        rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        let growing = growing_columns(&rows);
        Self { family, rows, growing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            n_radial: 4,
            n_angular: 8,
        }
    }
}

const NOISE: f64 = 1e-14;

/// `num / (factor·ℰ)`, with `factor·𝒟(u)` setting the rounding level.
fn ratio(num: f64, factor: f64, strain: f64, gradient: f64) -> f64 {
    let den = factor * strain;
    let noise = NOISE * factor * gradient;
    if den > noise {
        num / den
    } else if num.abs() <= noise {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Trapezoid integral of `|v|²` on the nodes `s`.
fn line_l2(s: &[f64], v: impl Fn(usize) -> f64) -> f64 {
    s.windows(2)
        .enumerate()
        .map(|(k, w)| 0.5 * (w[1] - w[0]) * (v(k) + v(k + 1)))
        .sum()
}

fn line_terms(geo: &ArcGeometry, e: &ElementaryDisplacement) -> Result<(f64, f64)> {
    let (du, dr) = e.derivatives();
    let mut shear = vec![0.0; e.s.len()];
    for k in 0..e.s.len() {
        let t = geo.frame_at(e.s[k])?.t;
        shear[k] = (du[k] - e.r[k].cross(&t)).norm_squared();
    }
    Ok((
        line_l2(&e.s, |k| dr[k].norm_squared()),
        line_l2(&e.s, |k| shear[k]),
    ))
}

/// Piecewise linear interpolation of nodal values.
fn interp(s: &[f64], v: &[Vec3], x: f64) -> Vec3 {
    let k = s.partition_point(|&t| t <= x).clamp(1, s.len() - 1);
    let (a, b) = (s[k - 1], s[k]);
    let w = ((x - a) / (b - a)).clamp(0.0, 1.0);
    v[k - 1] * (1.0 - w) + v[k] * w
}

/// Evaluate one family over a list of thicknesses.
pub fn estimate_report(
    skeleton: &Arc<Skeleton>,
    family: FieldFamily,
    deltas: &[f64],
    opts: EstimateOptions,
) -> Result<EstimateReport> {
    let mut rows = vec![];
    for &delta in deltas {
        let fields = skeleton
            .arcs
            .iter()
            .map(|geo| family.sample(geo, delta, opts.n_radial, opts.n_angular))
            .collect::<Result<Vec<_>>>()?;
        rows.push(estimate_row(skeleton, &fields)?);
    }
    Ok(EstimateReport::new(Some(family), rows))
}

/// Ratios for one set of tube fields, one per arc in arc order, all with the
/// same thickness.
pub fn estimate_row(skeleton: &Arc<Skeleton>, fields: &[TubeField]) -> Result<EstimateRow> {
    if fields.len() != skeleton.arcs.len() || fields.iter().enumerate().any(|(i, f)| f.arc != i) {
        return Err(Error::InvalidInput("need one tube field per arc, in arc order".into()));
    }
    let delta = fields.first().map(|f| f.delta).unwrap_or(0.0);
    if fields.iter().any(|f| f.delta != delta) {
        return Err(Error::InvalidInput("tube fields with different thicknesses".into()));
    }
    let mut strain = 0.0;
    let mut gradient = 0.0;
    for (geo, f) in skeleton.arcs.iter().zip(fields) {
        let e = energy_functionals(f, geo)?;
        strain += e.strain;
        gradient += e.gradient;
    }
    let rod: Vec<ElementaryDisplacement> = skeleton
        .arcs
        .iter()
        .zip(fields)
        .map(|(geo, f)| elementary_decompose(f, geo))
        .collect::<Result<_>>()?;
    let structure = if skeleton.knots.is_empty() {
        rod.clone()
    } else {
        rigidify_junctions(skeleton, &rod, &fields, delta)?.arcs
    };

    let mut acc = [0.0; 9];
    for (i, geo) in skeleton.arcs.iter().enumerate() {
        let f = &fields[i];
        for (e, base) in [(&rod[i], 0), (&structure[i], 3)] {
            let diff = f.sub(&e.to_field(geo, f)?)?;
            acc[base] += energy_functionals(&diff, geo)?.gradient;
            acc[base + 1] += l2_squared(&diff, geo)?;
            let (rot, shear) = line_terms(geo, e)?;
            acc[base + 2] += delta * delta * rot + shear;
        }
        let (p, q) = (&rod[i], &structure[i]);
        let du: Vec<Vec3> = q.u.iter().zip(&p.u).map(|(a, b)| a - b).collect();
        let dr: Vec<Vec3> = q.r.iter().zip(&p.r).map(|(a, b)| a - b).collect();
        let diff = ElementaryDisplacement {
            arc: i,
            s: p.s.clone(),
            u: du.clone(),
            r: dr.clone(),
        };
        let (ddu, _) = diff.derivatives();
        acc[6] += line_l2(&p.s, |k| du[k].norm_squared())
            + delta * delta * line_l2(&p.s, |k| ddu[k].norm_squared())
            + delta * delta * line_l2(&p.s, |k| dr[k].norm_squared());
    }
    let splitting = if skeleton.clamped.is_empty() {
        None
    } else {
        Some(splitting_numerator(skeleton, &structure, delta)?)
    };
    let peak = structure
        .iter()
        .flat_map(|e| e.u.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    let at_clamps = skeleton
        .clamped
        .iter()
        .map(|c| {
            let e = &structure[c.arc];
            let k = if skeleton.clamped_abscissa(c) > 0.0 { e.s.len() - 1 } else { 0 };
            e.u[k].norm()
        })
        .fold(0.0, f64::max);
    let d2 = delta * delta;
    let r = |num, factor| ratio(num, factor, strain, gradient);
    Ok(EstimateRow {
        delta,
        strain_energy: strain,
        gradient_energy: gradient,
        rod_gradient_ratio: r(acc[0], 1.0),
        rod_l2_ratio: r(acc[1], d2),
        rod_line_ratio: r(d2 * acc[2], 1.0),
        blend_ratio: r(acc[6], 1.0),
        structure_gradient_ratio: r(acc[3], 1.0),
        structure_l2_ratio: r(acc[4], d2),
        structure_line_ratio: r(d2 * acc[5], 1.0),
        splitting_ratio: splitting.map(|n| r(d2 * n, 1.0)),
        clamp_defect: if peak > 0.0 { at_clamps / peak } else { 0.0 },
    })
}

/// `‖U_E‖² + δ²‖U_I‖² + Σ‖dU_I/ds − ℛ×T‖²` for `𝒰 = U_I + U_E`.
fn splitting_numerator(skeleton: &Arc<Skeleton>, e: &[ElementaryDisplacement], delta: f64) -> Result<f64> {
    let h = skeleton
        .arcs
        .iter()
        .map(|a| a.length())
        .fold(f64::INFINITY, f64::min)
        .min(4.0 * delta)
        / 2.0;
    let mesh = SkeletonMesh::build(skeleton.clone(), h, Order::P2)?;
    let u = SkeletonField::interpolate(&mesh, |arc, s| interp(&e[arc].s, &e[arc].u, s));
    let (ui, ue) = DiProjector::new(&mesh)?.project(&u)?;
    let mut shear = 0.0;
    for (k, el) in mesh.elements().iter().enumerate() {
        let d = &e[el.arc];
        for q in &el.q4 {
            let (_, dui) = ui.eval_element(k, q.xi);
            let r = interp(&d.s, &d.r, q.s);
            shear += q.weight * (dui - r.cross(&q.frame.t)).norm_squared();
        }
    }
    Ok(k_norm(&ue).powi(2) + delta * delta * k_norm(&ui).powi(2) + shear)
}

fn growing_columns(rows: &[EstimateRow]) -> Vec<String> {
    if rows.len() < 2 {
        return vec![];
    }
    let cols: [(&str, fn(&EstimateRow) -> f64); 8] = [
        ("rod_gradient_ratio", |r| r.rod_gradient_ratio),
        ("rod_l2_ratio", |r| r.rod_l2_ratio),
        ("rod_line_ratio", |r| r.rod_line_ratio),
        ("blend_ratio", |r| r.blend_ratio),
        ("structure_gradient_ratio", |r| r.structure_gradient_ratio),
        ("structure_l2_ratio", |r| r.structure_l2_ratio),
        ("structure_line_ratio", |r| r.structure_line_ratio),
        ("splitting_ratio", |r| r.splitting_ratio.unwrap_or(0.0)),
    ];
    cols.iter()
        .filter(|(_, f)| {
            rows.windows(2)
                .all(|w| f(&w[1]) > 1.05 * f(&w[0]) && f(&w[1]) > 1e-12)
        })
        .map(|(n, _)| n.to_string())
        .collect()
}
