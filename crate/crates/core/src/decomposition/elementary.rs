//! Elementary rod displacements `𝒰(s) + ℛ(s) × (y₂N + y₃B)`, rigid fits near
//! knots and the rigidification of junctions.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector6};
use serde::Serialize;

use super::grid::{derivative_stencils, TubeField, TubeGrid};
use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, Skeleton, Vec3};

/// Nodal values of `(𝒰, ℛ)` on the abscissae of a tube grid.
#[derive(Debug, Clone, Serialize)]
pub struct ElementaryDisplacement {
    pub arc: usize,
    pub s: Vec<f64>,
    pub u: Vec<Vec3>,
    pub r: Vec<Vec3>,
}

impl ElementaryDisplacement {
    /// `𝒰(s_k) + ℛ(s_k) × (y₂N + y₃B)` at node `k`.
    pub fn eval_node(&self, geo: &ArcGeometry, k: usize, y2: f64, y3: f64) -> Result<Vec3> {
        let f = geo.frame_at(self.s[k])?;
        Ok(self.u[k] + self.r[k].cross(&(f.n * y2 + f.b * y3)))
    }

    /// The displacement sampled on the grid of `like`.
    pub fn to_field(&self, geo: &ArcGeometry, like: &TubeField) -> Result<TubeField> {
        let disc = like.grid.disc_points();
        let d = like.delta;
        let mut values = Vec::with_capacity(like.grid.len());
        for k in 0..self.s.len() {
            let f = geo.frame_at(self.s[k])?;
            for &(a, b) in &disc {
                values.push(self.u[k] + self.r[k].cross(&(f.n * (d * a) + f.b * (d * b))));
            }
        }
        TubeField::new(self.arc, like.delta, like.grid.clone(), values)
    }

    /// Derivatives of the nodal arrays in `s`.
    pub fn derivatives(&self) -> (Vec<Vec3>, Vec<Vec3>) {
        let st = derivative_stencils(&self.s);
        let d = |v: &[Vec3]| -> Vec<Vec3> {
            st.iter()
                .map(|(start, w)| w.iter().enumerate().map(|(k, wk)| v[start + k] * *wk).sum())
                .collect()
        };
        (d(&self.u), d(&self.r))
    }
}

/// Per-section least-squares fit of `𝒰 + ℛ × (y₂N + y₃B)` to the samples,
/// with the flat disc measure. With `I = Σ w y₂² = Σ w y₃²` (πδ⁴/4 for an
/// exact rule), `𝒰` is the section mean and
/// `ℛ·N = ∫(u·T)y₃ / I`, `ℛ·B = −∫(u·T)y₂ / I`,
/// `ℛ·T = ∫(y₂ u·B − y₃ u·N) / 2I`.
pub fn elementary_decompose(field: &TubeField, geo: &ArcGeometry) -> Result<ElementaryDisplacement> {
    let g = &field.grid;
    g.check()?;
    let disc = g.disc_points();
    let w = g.disc_weights();
    let d = field.delta;
    let area: f64 = w.iter().sum::<f64>() * d * d;
    let m2: f64 = disc.iter().zip(&w).map(|(p, wi)| wi * p.0 * p.0).sum::<f64>() * d.powi(4);
    let m3: f64 = disc.iter().zip(&w).map(|(p, wi)| wi * p.1 * p.1).sum::<f64>() * d.powi(4);
    let m23: f64 = disc.iter().zip(&w).map(|(p, wi)| wi * p.0 * p.1).sum::<f64>() * d.powi(4);
    let m1: f64 = disc.iter().zip(&w).map(|(p, wi)| wi * (p.0.abs() + p.1.abs())).sum::<f64>();
    let m1s: f64 = disc.iter().zip(&w).map(|(p, wi)| wi * (p.0 + p.1)).sum::<f64>();
    let scale = m2.max(m3);
    if !(scale > 0.0)
        || (m2 - m3).abs() > 1e-10 * scale
        || m23.abs() > 1e-10 * scale
        || m1s.abs() > 1e-12 * m1
    {
        return Err(Error::RankDeficient(
            "cross-section sampling is not symmetric enough for the moment fit".into(),
        ));
    }
    let inertia = 0.5 * (m2 + m3);
    let mut out = ElementaryDisplacement {
        arc: field.arc,
        s: g.s.clone(),
        u: vec![],
        r: vec![],
    };
    for (k, &s) in g.s.iter().enumerate() {
        let f = geo.frame_at(s)?;
        let sec = field.section(k);
        let mut mean = Vec3::zeros();
        let (mut a2, mut a3, mut tw) = (0.0, 0.0, 0.0);
        for (j, &(y2, y3)) in disc.iter().enumerate() {
            let ww = w[j] * d * d;
            let (p, q) = (d * y2, d * y3);
            let u = sec[j];
            mean += u * ww;
            let ut = u.dot(&f.t);
            a2 += ww * ut * p;
            a3 += ww * ut * q;
            tw += ww * (p * u.dot(&f.b) - q * u.dot(&f.n));
        }
        out.u.push(mean / area);
        let rn = a3 / inertia;
        let rb = -a2 / inertia;
        let rt = tw / (2.0 * inertia);
        out.r.push(f.t * rt + f.n * rn + f.b * rb);
    }
    Ok(out)
}

/// Rigid displacement `a + b × (x − A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rigid {
    pub a: Vec3,
    pub b: Vec3,
}

impl Rigid {
    pub fn eval(&self, x: &Vec3, center: &Vec3) -> Vec3 {
        self.a + self.b.cross(&(x - center))
    }
}

/// Least-squares rigid displacement `a + b × (x − A)` for samples `(x, u)`.
pub fn rigid_fit_ball(samples: &[(Vec3, Vec3)], center: Vec3) -> Result<Rigid> {
    if samples.len() < 20 {
        return Err(Error::RankDeficient(format!(
            "{} samples in the ball, need at least 20",
            samples.len()
        )));
    }
    // rows [I, −[p]ₓ] for each sample
    let mut m = Matrix6::zeros();
    let mut rhs = Vector6::zeros();
    for (x, u) in samples {
        let p = x - center;
        let px = Matrix3::new(0.0, -p[2], p[1], p[2], 0.0, -p[0], -p[1], p[0], 0.0);
        let mut row = nalgebra::Matrix3x6::zeros();
        row.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
        row.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-px));
        m += row.transpose() * row;
        rhs += row.transpose() * u;
    }
    let eig = m.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
    if !(lo > 1e-12 * hi) {
        return Err(Error::RankDeficient(
            "ball samples do not determine a rotation".into(),
        ));
    }
    let x = m
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("normal equations not definite".into()))?
        .solve(&rhs);
    Ok(Rigid {
        a: Vec3::new(x[0], x[1], x[2]),
        b: Vec3::new(x[3], x[4], x[5]),
    })
}

/// Dense least-squares oracle for [`rigid_fit_ball`] (SVD of the stacked system).
pub fn rigid_fit_dense(samples: &[(Vec3, Vec3)], center: Vec3) -> Result<Rigid> {
    let n = samples.len();
    let mut a = DMatrix::zeros(3 * n, 6);
    let mut b = DVector::zeros(3 * n);
    for (i, (x, u)) in samples.iter().enumerate() {
        let p = x - center;
        for c in 0..3 {
            a[(3 * i + c, c)] = 1.0;
            b[3 * i + c] = u[c];
        }
        // b × p = (b₂p₃ − b₃p₂, b₃p₁ − b₁p₃, b₁p₂ − b₂p₁)
        a[(3 * i, 4)] = p[2];
        a[(3 * i, 5)] = -p[1];
        a[(3 * i + 1, 3)] = -p[2];
        a[(3 * i + 1, 5)] = p[0];
        a[(3 * i + 2, 3)] = p[1];
        a[(3 * i + 2, 4)] = -p[0];
    }
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(Rigid {
        a: Vec3::new(x[0], x[1], x[2]),
        b: Vec3::new(x[3], x[4], x[5]),
    })
}

/// Even cutoff: 0 on `[0, ρ]`, 1 on `[ρ+1, ∞)`, quintic smoothstep between.
pub fn cutoff_m(t: f64, rho: f64) -> f64 {
    let x = (t.abs() - rho).clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Grid samples of the tube fields lying in the ball `B(A; δ/5)` around a knot.
pub fn ball_samples(
    skeleton: &Skeleton,
    fields: &[TubeField],
    knot: usize,
    delta: f64,
) -> Result<Vec<(Vec3, Vec3)>> {
    let k = &skeleton.knots[knot];
    let radius = delta / 5.0;
    let mut out = vec![];
    for field in fields {
        if !k.incidences.iter().any(|i| i.arc == field.arc) {
            continue;
        }
        let geo = skeleton.arc(field.arc)?;
        let disc = field.grid.disc_points();
        for (is, &s) in field.grid.s.iter().enumerate() {
            if k.incidences
                .iter()
                .filter(|i| i.arc == field.arc)
                .all(|i| (s - i.s).abs() > radius)
            {
                continue;
            }
            for (j, &(y2, y3)) in disc.iter().enumerate() {
                let x = geo.tube_point(s, delta * y2, delta * y3)?;
                if (x - k.position).norm() <= radius {
                    out.push((x, field.values[is * disc.len() + j]));
                }
            }
        }
    }
    Ok(out)
}

/// Result of [`rigidify_junctions`].
#[derive(Debug, Clone, Serialize)]
pub struct Rigidified {
    pub arcs: Vec<ElementaryDisplacement>,
    /// Fitted rigid displacement per knot.
    pub knots: Vec<Rigid>,
    /// `ρ` used per knot.
    pub rho: Vec<f64>,
}

/// Make the per-arc elementary displacements rigid on every junction and
/// blend them back with the cutoff; the result is continuous at each knot.
pub fn rigidify_junctions(
    skeleton: &Skeleton,
    elementary: &[ElementaryDisplacement],
    fields: &[TubeField],
    delta: f64,
) -> Result<Rigidified> {
    let mut arcs = elementary.to_vec();
    let mut fits = vec![];
    let mut rhos = vec![];
    // blend zones per arc, to detect overlaps
    let mut zones: Vec<Vec<(usize, f64, f64)>> = vec![vec![]; skeleton.arcs.len()];
    for (ki, knot) in skeleton.knots.iter().enumerate() {
        let rho = skeleton.effective_rho(ki, delta);
        skeleton.junction_extent(ki, delta, rho)?;
        let fit = rigid_fit_ball(&ball_samples(skeleton, fields, ki, delta)?, knot.position)?;
        for inc in &knot.incidences {
            let lo = inc.s - (rho + 1.0) * delta;
            let hi = inc.s + (rho + 1.0) * delta;
            for &(other, olo, ohi) in &zones[inc.arc] {
                if other != ki && lo < ohi && olo < hi {
                    return Err(Error::OverlappingJunctions {
                        arc: inc.arc,
                        first: other,
                        second: ki,
                    });
                }
            }
            zones[inc.arc].push((ki, lo, hi));
        }
        fits.push(fit);
        rhos.push(rho);
    }
    for e in arcs.iter_mut() {
        let geo = skeleton.arc(e.arc)?;
        for &(ki, _, _) in &zones[e.arc] {
            let knot = &skeleton.knots[ki];
            let fit = fits[ki];
            for inc in knot.incidences.iter().filter(|i| i.arc == e.arc) {
                for k in 0..e.s.len() {
                    let m = cutoff_m((e.s[k] - inc.s) / delta, rhos[ki]);
                    if m >= 1.0 {
                        continue;
                    }
                    let x = geo.position(e.s[k])?;
                    let rigid_u = fit.eval(&x, &knot.position);
                    e.u[k] = e.u[k] * m + rigid_u * (1.0 - m);
                    e.r[k] = e.r[k] * m + fit.b * (1.0 - m);
                }
            }
        }
    }
    Ok(Rigidified {
        arcs,
        knots: fits,
        rho: rhos,
    })
}

/// Uniform tube grid with spacing at most `delta / 10` so that every knot
/// ball contains enough samples.
pub fn grid_for(geo: &ArcGeometry, delta: f64, n_radial: usize, n_angular: usize) -> TubeGrid {
    let mut n = ((geo.length() / (delta / 10.0)).ceil() as usize).max(4);
    if n % 2 == 1 {
        n += 1;
    }
    TubeGrid::uniform(geo.length(), n + 1, n_radial, n_angular)
}
