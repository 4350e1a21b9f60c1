//! Parametric curve primitives, before arclength reparametrization.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// User-facing curve description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveSpec {
    Segment {
        start: [f64; 3],
        end: [f64; 3],
    },
    /// `center + radius (cos θ e1 + sin θ e2)` for θ from `start_angle` to `end_angle`.
    CircularArc {
        center: [f64; 3],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        #[serde(default = "unit_x")]
        e1: [f64; 3],
        #[serde(default = "unit_y")]
        e2: [f64; 3],
    },
    /// `center + radius (cos t e1 + sin t e2) + pitch t e3` for t from `t0` to `t1`.
    Helix {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
        pitch: f64,
        t0: f64,
        t1: f64,
        #[serde(default = "unit_x")]
        e1: [f64; 3],
        #[serde(default = "unit_y")]
        e2: [f64; 3],
    },
    /// Interpolating cubic spline through `points` (chord-length parameter);
    /// natural end conditions, or periodic when `closed`.
    Spline {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        closed: bool,
    },
}

fn unit_x() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn unit_y() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

pub(crate) fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Orthonormal in-plane basis from two user vectors (Gram–Schmidt).
fn plane_basis(e1: [f64; 3], e2: [f64; 3]) -> Result<(Vec3, Vec3, Vec3)> {
    let u = v3(e1);
    let nu = u.norm();
    if nu < 1e-14 {
        return Err(Error::InvalidInput("e1 must be nonzero".into()));
    }
    let u = u / nu;
    let w = v3(e2) - u * u.dot(&v3(e2));
    let nw = w.norm();
    if nw < 1e-10 {
        return Err(Error::InvalidInput("e1 and e2 must not be parallel".into()));
    }
    let v = w / nw;
    Ok((u, v, u.cross(&v)))
}

#[derive(Debug, Clone)]
struct CubicSpline {
    knots: Vec<f64>,
    points: Vec<Vec3>,
    second: Vec<Vec3>,
}

impl CubicSpline {
    fn new(raw: &[[f64; 3]], closed: bool) -> Result<Self> {
        let mut pts: Vec<Vec3> = raw.iter().map(|p| v3(*p)).collect();
        if closed && pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-14 {
            pts.pop();
        }
        let min_pts = if closed { 3 } else { 2 };
        if pts.len() < min_pts {
            return Err(Error::InvalidInput(format!(
                "spline needs at least {min_pts} distinct points"
            )));
        }
        if closed {
            pts.push(pts[0]);
        }
        let m = pts.len() - 1;
        let mut knots = vec![0.0; m + 1];
        for k in 0..m {
            let h = (pts[k + 1] - pts[k]).norm();
            if h < 1e-14 {
                return Err(Error::InvalidInput("repeated spline point".into()));
            }
            knots[k + 1] = knots[k] + h;
        }
        let h: Vec<f64> = (0..m).map(|k| knots[k + 1] - knots[k]).collect();
        let slope = |k: usize| (pts[k + 1] - pts[k]) / h[k];

        let mut second = vec![Vec3::zeros(); m + 1];
        if closed {
            // unknowns M_0..M_{m-1}, with M_m = M_0
            let n = m;
            let mut a = DMatrix::zeros(n, n);
            let mut rhs = DMatrix::zeros(n, 3);
            for k in 0..n {
                let km = (k + n - 1) % n;
                let (hm, hk) = (h[km], h[k]);
                a[(k, km)] += hm;
                a[(k, k)] += 2.0 * (hm + hk);
                a[(k, (k + 1) % n)] += hk;
                let r = 6.0 * (slope(k) - slope(km));
                for c in 0..3 {
                    rhs[(k, c)] = r[c];
                }
            }
            let sol = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidInput("periodic spline system singular".into()))?;
            for k in 0..n {
                second[k] = Vec3::new(sol[(k, 0)], sol[(k, 1)], sol[(k, 2)]);
            }
            second[m] = second[0];
        } else if m > 1 {
            let n = m - 1;
            let mut a = DMatrix::zeros(n, n);
            let mut rhs = DMatrix::zeros(n, 3);
            for i in 0..n {
                let k = i + 1;
                a[(i, i)] = 2.0 * (h[k - 1] + h[k]);
                if i > 0 {
                    a[(i, i - 1)] = h[k - 1];
                }
                if i + 1 < n {
                    a[(i, i + 1)] = h[k];
                }
                let r = 6.0 * (slope(k) - slope(k - 1));
                for c in 0..3 {
                    rhs[(i, c)] = r[c];
                }
            }
            let sol = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidInput("spline system singular".into()))?;
            for i in 0..n {
                second[i + 1] = Vec3::new(sol[(i, 0)], sol[(i, 1)], sol[(i, 2)]);
            }
        }
        Ok(Self {
            knots,
            points: pts,
            second,
        })
    }

    fn segment(&self, t: f64) -> usize {
        let m = self.knots.len() - 1;
        match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        }
    }

    fn derivs(&self, t: f64) -> [Vec3; 4] {
        let k = self.segment(t);
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let h = t1 - t0;
        let (a, b) = (t1 - t, t - t0);
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        let c0 = self.points[k] / h - m0 * (h / 6.0);
        let c1 = self.points[k + 1] / h - m1 * (h / 6.0);
        let p = m0 * (a * a * a / (6.0 * h)) + m1 * (b * b * b / (6.0 * h)) + c0 * a + c1 * b;
        let d1 = -m0 * (a * a / (2.0 * h)) + m1 * (b * b / (2.0 * h)) - c0 + c1;
        let d2 = m0 * (a / h) + m1 * (b / h);
        let d3 = (m1 - m0) / h;
        [p, d1, d2, d3]
    }
}

/// A curve `γ(t)` with three derivatives on a parameter interval.
#[derive(Debug, Clone)]
pub enum Curve {
    Segment {
        start: Vec3,
        delta: Vec3,
    },
    Circle {
        center: Vec3,
        radius: f64,
        theta0: f64,
        dtheta: f64,
        u: Vec3,
        v: Vec3,
    },
    Helix {
        center: Vec3,
        radius: f64,
        pitch: f64,
        t0: f64,
        dt: f64,
        u: Vec3,
        v: Vec3,
        w: Vec3,
    },
    Spline(CubicSplineCurve),
}

/// Opaque wrapper so the spline internals stay private.
#[derive(Debug, Clone)]
pub struct CubicSplineCurve(CubicSpline);

impl Curve {
    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        Ok(match spec {
            CurveSpec::Segment { start, end } => {
                let delta = v3(*end) - v3(*start);
                if delta.norm() < 1e-14 {
                    return Err(Error::InvalidInput("segment of zero length".into()));
                }
                Curve::Segment {
                    start: v3(*start),
                    delta,
                }
            }
            CurveSpec::CircularArc {
                center,
                radius,
                start_angle,
                end_angle,
                e1,
                e2,
            } => {
                if !(*radius > 0.0) || start_angle == end_angle {
                    return Err(Error::InvalidInput(
                        "circular arc needs radius > 0 and distinct angles".into(),
                    ));
                }
                let (u, v, _) = plane_basis(*e1, *e2)?;
                Curve::Circle {
                    center: v3(*center),
                    radius: *radius,
                    theta0: *start_angle,
                    dtheta: end_angle - start_angle,
                    u,
                    v,
                }
            }
            CurveSpec::Helix {
                center,
                radius,
                pitch,
                t0,
                t1,
                e1,
                e2,
            } => {
                if !(*radius > 0.0) || t0 == t1 {
                    return Err(Error::InvalidInput(
                        "helix needs radius > 0 and distinct parameters".into(),
                    ));
                }
                let (u, v, w) = plane_basis(*e1, *e2)?;
                Curve::Helix {
                    center: v3(*center),
                    radius: *radius,
                    pitch: *pitch,
                    t0: *t0,
                    dt: t1 - t0,
                    u,
                    v,
                    w,
                }
            }
            CurveSpec::Spline { points, closed } => {
                Curve::Spline(CubicSplineCurve(CubicSpline::new(points, *closed)?))
            }
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Curve::Spline(s) => (0.0, *s.0.knots.last().unwrap()),
            _ => (0.0, 1.0),
        }
    }

    /// Parameter values where the curve is only piecewise smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Curve::Spline(s) => s.0.knots.clone(),
            _ => vec![0.0, 1.0],
        }
    }

    /// `[γ, γ', γ'', γ''']` at parameter `t`.
    pub fn derivs(&self, t: f64) -> [Vec3; 4] {
        match self {
            Curve::Segment { start, delta } => [start + delta * t, *delta, Vec3::zeros(), Vec3::zeros()],
            Curve::Circle {
                center,
                radius,
                theta0,
                dtheta,
                u,
                v,
            } => {
                let th = theta0 + dtheta * t;
                let (s, c) = th.sin_cos();
                let r = *radius;
                let d = *dtheta;
                [
                    center + (u * c + v * s) * r,
                    (-u * s + v * c) * (r * d),
                    (-u * c - v * s) * (r * d * d),
                    (u * s - v * c) * (r * d * d * d),
                ]
            }
            Curve::Helix {
                center,
                radius,
                pitch,
                t0,
                dt,
                u,
                v,
                w,
            } => {
                let th = t0 + dt * t;
                let (s, c) = th.sin_cos();
                let (r, b, d) = (*radius, *pitch, *dt);
                [
                    center + (u * c + v * s) * r + w * (b * th),
                    ((-u * s + v * c) * r + w * b) * d,
                    (-u * c - v * s) * (r * d * d),
                    (u * s - v * c) * (r * d * d * d),
                ]
            }
            Curve::Spline(s) => s.0.derivs(t),
        }
    }
}
