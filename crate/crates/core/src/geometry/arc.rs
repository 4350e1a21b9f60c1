//! Arclength-parametrized arcs and their Frenet frames.

use serde::Serialize;

use super::curve::{v3, Curve, CurveSpec, Vec3};
use crate::error::{Error, Result};
use crate::linalg::gauss_legendre;

/// Curvature below which the Frenet normal is considered undefined.
pub const C_MIN: f64 = 1e-8;
pub const TOL_ARCLEN: f64 = 1e-8;
pub const TOL_FRAME: f64 = 1e-10;

const PANEL_GAUSS: usize = 8;

/// Frenet frame and curvature data at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    pub t: Vec3,
    pub n: Vec3,
    pub b: Vec3,
    pub curvature: f64,
    pub torsion: f64,
}

/// A curve reparametrized by arclength `s ∈ [0, L]`.
#[derive(Debug, Clone)]
pub struct ArcGeometry {
    id: usize,
    curve: Curve,
    length: f64,
    closed: bool,
    frame_override: Option<Vec3>,
    /// Parameter values delimiting the arclength panels, and `S(t)` at each.
    panel_t: Vec<f64>,
    panel_s: Vec<f64>,
    gauss: (Vec<f64>, Vec<f64>),
    /// Closed-form primitives have constant speed, so `t` is affine in `s`.
    uniform_speed: bool,
}

impl ArcGeometry {
    /// Build an arc from a curve description. `resample_n` (≥ 8) is the number
    /// of arclength panels per smooth piece and the frame-check sample count.
    pub fn build(
        id: usize,
        spec: &CurveSpec,
        frame_override: Option<[f64; 3]>,
        resample_n: usize,
    ) -> Result<Self> {
        if resample_n < 8 {
            return Err(Error::OutOfRange {
                what: "resample_n",
                value: resample_n as f64,
                lo: 8.0,
                hi: f64::INFINITY,
            });
        }
        let curve = Curve::from_spec(spec)?;
        let gauss = gauss_legendre(PANEL_GAUSS);

        let mut panel_t = vec![];
        let bps = curve.breakpoints();
        for w in bps.windows(2) {
            for k in 0..resample_n {
                panel_t.push(w[0] + (w[1] - w[0]) * k as f64 / resample_n as f64);
            }
        }
        panel_t.push(*bps.last().unwrap());

        let mut min_speed = f64::INFINITY;
        let mut panel_s = vec![0.0];
        for w in panel_t.windows(2) {
            let (seg, speed) = integrate_speed(&curve, &gauss, w[0], w[1]);
            min_speed = min_speed.min(speed);
            panel_s.push(panel_s.last().unwrap() + seg);
        }
        let length = *panel_s.last().unwrap();
        if !(min_speed > 1e-12 * length.max(1e-300)) || !length.is_finite() {
            return Err(Error::NonUnitSpeedUnfixable {
                arc: id,
                detail: "curve speed vanishes".into(),
            });
        }

        // Independent check of the length with a doubled panel count.
        let mut fine = 0.0;
        for w in panel_t.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            fine += integrate_speed(&curve, &gauss, w[0], mid).0;
            fine += integrate_speed(&curve, &gauss, mid, w[1]).0;
        }
        if (fine - length).abs() > TOL_ARCLEN * length {
            return Err(Error::NonUnitSpeedUnfixable {
                arc: id,
                detail: format!("arclength quadrature unresolved ({length} vs {fine})"),
            });
        }

        let (t0, t1) = curve.domain();
        let closed = (curve.derivs(t0)[0] - curve.derivs(t1)[0]).norm() <= 1e-9 * length;

        let frame_override = match frame_override {
            Some(o) if v3(o).norm() < 1e-14 => {
                return Err(Error::InvalidInput("frame_override must be nonzero".into()))
            }
            o => o.map(|o| v3(o).normalize()),
        };

        let arc = Self {
            id,
            curve,
            length,
            closed,
            frame_override,
            panel_t,
            panel_s,
            gauss,
            uniform_speed: !matches!(spec, CurveSpec::Spline { .. }),
        };

        // Reparametrization round trip and frame existence on a sample grid.
        let m = resample_n * (arc.panel_t.len() - 1).max(1);
        for k in 0..=m {
            let s = arc.length * k as f64 / m as f64;
            let t = arc.param_at(s);
            let back = arc.arclength_at(t);
            if (back - s).abs() > TOL_ARCLEN * arc.length {
                return Err(Error::NonUnitSpeedUnfixable {
                    arc: id,
                    detail: format!("inversion error {:.3e} at s = {s}", (back - s).abs()),
                });
            }
            arc.frame_at(s)?;
        }
        Ok(arc)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn frame_override(&self) -> Option<Vec3> {
        self.frame_override
    }

    fn arclength_at(&self, t: f64) -> f64 {
        let k = self.panel_index(t);
        self.panel_s[k] + integrate_speed(&self.curve, &self.gauss, self.panel_t[k], t).0
    }

    fn panel_index(&self, t: f64) -> usize {
        let last = self.panel_t.len() - 2;
        match self
            .panel_t
            .binary_search_by(|p| p.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Curve parameter `t(s)`: bracketed Newton on the integrated speed.
    pub fn param_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        if self.uniform_speed {
            let (t0, t1) = self.curve.domain();
            return t0 + (t1 - t0) * s / self.length;
        }
        let k = match self
            .panel_s
            .binary_search_by(|p| p.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.panel_s.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.panel_s.len() - 2),
        };
        let (mut lo, mut hi) = (self.panel_t[k], self.panel_t[k + 1]);
        let (s_lo, s_hi) = (self.panel_s[k], self.panel_s[k + 1]);
        let mut t = lo + (hi - lo) * (s - s_lo) / (s_hi - s_lo);
        for _ in 0..60 {
            let f = self.panel_s[k]
                + integrate_speed(&self.curve, &self.gauss, self.panel_t[k], t).0
                - s;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = self.curve.derivs(t)[1].norm();
            let mut next = t - f / speed;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    fn check_s(&self, s: f64) -> Result<f64> {
        let slack = 1e-12 * self.length;
        if s < -slack || s > self.length + slack || s.is_nan() {
            return Err(Error::OutOfRange {
                what: "abscissa",
                value: s,
                lo: 0.0,
                hi: self.length,
            });
        }
        Ok(s.clamp(0.0, self.length))
    }

    /// Centerline point `φ(s)`.
    pub fn position(&self, s: f64) -> Result<Vec3> {
        let s = self.check_s(s)?;
        Ok(self.curve.derivs(self.param_at(s))[0])
    }

    /// Frenet frame at `s`, with `OutOfRange` for abscissae outside `[0, L]`.
    pub fn frenet(&self, s: f64) -> Result<Frame> {
        let s = self.check_s(s)?;
        self.frame_at(s)
    }

    /// Frame at a clamped abscissa.
    pub fn frame_at(&self, s: f64) -> Result<Frame> {
        let s = s.clamp(0.0, self.length);
        let [_, d1, d2, d3] = self.curve.derivs(self.param_at(s));
        let sp = d1.norm();
        let t = d1 / sp;
        let cross = d1.cross(&d2);
        let cn = cross.norm();
        let c = cn / (sp * sp * sp);
        if c < C_MIN {
            let Some(o) = self.frame_override else {
                return Err(Error::FrameUndefined { arc: self.id, s });
            };
            let n = (o - t * o.dot(&t)).normalize();
            return Ok(Frame {
                t,
                n,
                b: t.cross(&n),
                curvature: 0.0,
                torsion: 0.0,
            });
        }
        let n = (d2 - t * d2.dot(&t)).normalize();
        Ok(Frame {
            t,
            n,
            b: t.cross(&n),
            curvature: c,
            torsion: cross.dot(&d3) / (cn * cn),
        })
    }

    /// Tube map `Φ(s, y2, y3) = φ(s) + y2 N(s) + y3 B(s)`; no thickness check here.
    pub fn tube_point(&self, s: f64, y2: f64, y3: f64) -> Result<Vec3> {
        let s = self.check_s(s)?;
        let f = self.frame_at(s)?;
        Ok(self.curve.derivs(self.param_at(s))[0] + f.n * y2 + f.b * y3)
    }

    /// Largest curvature over a uniform sample (and the arc ends).
    pub fn max_curvature(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|k| {
                self.frame_at(self.length * k as f64 / samples as f64)
                    .map(|f| f.curvature)
                    .unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Uniform centerline sample `(s, φ(s))` with `n` intervals.
    pub fn sample(&self, n: usize) -> Vec<(f64, Vec3)> {
        (0..=n)
            .map(|k| {
                let s = self.length * k as f64 / n as f64;
                (s, self.curve.derivs(self.param_at(s))[0])
            })
            .collect()
    }

    /// Closest abscissa on this arc to `x`, starting from a coarse sample.
    pub fn closest_abscissa(&self, x: &Vec3, coarse: &[(f64, Vec3)]) -> (f64, f64) {
        let mut best = coarse
            .iter()
            .map(|(s, p)| (*s, (p - x).norm()))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut s = best.0;
        for _ in 0..30 {
            let Ok(f) = self.frame_at(s) else { break };
            let p = self.curve.derivs(self.param_at(s))[0];
            let d = p - x;
            let g = d.dot(&f.t);
            let gp = 1.0 + f.curvature * d.dot(&f.n);
            let step = if gp > 0.1 { g / gp } else { g };
            let next = (s - step).clamp(0.0, self.length);
            if (next - s).abs() < 1e-14 * (1.0 + self.length) {
                s = next;
                break;
            }
            s = next;
        }
        let dist = (self.curve.derivs(self.param_at(s))[0] - x).norm();
        if dist < best.1 {
            best = (s, dist);
        }
        best
    }
}

/// `(∫_a^b |γ'| dt, min sampled speed)` with one Gauss panel.
fn integrate_speed(curve: &Curve, gauss: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    let mut sum = 0.0;
    let mut min_speed = f64::INFINITY;
    for (x, w) in gauss.0.iter().zip(&gauss.1) {
        let sp = curve.derivs(a + h * x)[1].norm();
        min_speed = min_speed.min(sp);
        sum += w * sp;
    }
    (sum * h, min_speed)
}
