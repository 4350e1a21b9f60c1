//! The skeleton graph: arcs, knots, clamped ends, and its validation.

use serde::{Deserialize, Serialize};

use super::arc::{ArcGeometry, TOL_FRAME};
use super::curve::Vec3;
use crate::error::{Error, Result};

pub const TOL_KNOT: f64 = 1e-9;
pub const TOL_TANGENCY: f64 = 1e-6;

/// Which end of an arc is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampedEnd {
    pub arc: usize,
    pub end: End,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub arc: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knot {
    pub id: usize,
    pub position: Vec3,
    pub incidences: Vec<Incidence>,
    /// Junction extent multiplier, at least 1.
    pub rho: f64,
}

impl Knot {
    pub fn incidence_on(&self, arc: usize) -> impl Iterator<Item = &Incidence> {
        self.incidences.iter().filter(move |i| i.arc == arc)
    }
}

/// Half-open description of one piece of a junction on an arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JunctionInterval {
    pub arc: usize,
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    pub arcs: Vec<ArcGeometry>,
    pub knots: Vec<Knot>,
    pub clamped: Vec<ClampedEnd>,
    delta0: f64,
}

impl Skeleton {
    pub fn new(arcs: Vec<ArcGeometry>, knots: Vec<Knot>, clamped: Vec<ClampedEnd>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidInput("skeleton has no arcs".into()));
        }
        for (k, knot) in knots.iter().enumerate() {
            if !(knot.rho >= 1.0) {
                return Err(Error::InvalidInput(format!("knot {k}: rho must be >= 1")));
            }
            for inc in &knot.incidences {
                let arc = arcs.get(inc.arc).ok_or_else(|| {
                    Error::InvalidInput(format!("knot {k} references missing arc {}", inc.arc))
                })?;
                let slack = 1e-12 * arc.length();
                if inc.s < -slack || inc.s > arc.length() + slack {
                    return Err(Error::OutOfRange {
                        what: "knot abscissa",
                        value: inc.s,
                        lo: 0.0,
                        hi: arc.length(),
                    });
                }
            }
        }
        for c in &clamped {
            if c.arc >= arcs.len() {
                return Err(Error::InvalidInput(format!("clamped end on missing arc {}", c.arc)));
            }
        }
        let mut sk = Self {
            arcs,
            knots,
            clamped,
            delta0: 0.0,
        };
        sk.delta0 = sk.compute_delta0();
        Ok(sk)
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn clamped_abscissa(&self, c: &ClampedEnd) -> f64 {
        match c.end {
            End::Start => 0.0,
            End::End => self.arcs[c.arc].length(),
        }
    }

    /// Typical length scale, used to make tolerances relative.
    pub fn scale(&self) -> f64 {
        self.arcs.iter().map(|a| a.length()).fold(0.0, f64::max)
    }

    fn share_knot(&self, i: usize, j: usize) -> bool {
        self.knots.iter().any(|k| {
            k.incidences.iter().any(|a| a.arc == i) && k.incidences.iter().any(|a| a.arc == j)
        })
    }

    fn compute_delta0(&self) -> f64 {
        let mut d0 = f64::INFINITY;
        for arc in &self.arcs {
            let c = arc.max_curvature(256);
            if c > 0.0 {
                d0 = d0.min(1.0 / c);
            }
            d0 = d0.min(0.5 * arc.length());
        }
        for i in 0..self.arcs.len() {
            for j in (i + 1)..self.arcs.len() {
                if !self.share_knot(i, j) {
                    d0 = d0.min(0.5 * min_distance(&self.arcs[i], &self.arcs[j]).0);
                }
            }
        }
        d0
    }

    /// Tube map with the thickness bound enforced.
    pub fn tube_map(&self, arc: usize, s: f64, y2: f64, y3: f64) -> Result<Vec3> {
        let r = (y2 * y2 + y3 * y3).sqrt();
        if r > self.delta0 * (1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                what: "cross-section radius",
                value: r,
                lo: 0.0,
                hi: self.delta0,
            });
        }
        self.arc(arc)?.tube_point(s, y2, y3)
    }

    pub fn arc(&self, i: usize) -> Result<&ArcGeometry> {
        self.arcs
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("no arc {i}")))
    }

    /// Junction intervals `]a_i − ρδ, a_i + ρδ[` clipped to each incident arc.
    pub fn junction_extent(&self, knot: usize, delta: f64, rho: f64) -> Result<Vec<JunctionInterval>> {
        if !(delta > 0.0) || delta > self.delta0 * (1.0 + 1e-12) {
            return Err(Error::DeltaTooLarge {
                delta,
                delta0: self.delta0,
            });
        }
        if !(rho >= 1.0) {
            return Err(Error::OutOfRange {
                what: "rho",
                value: rho,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        let k = self
            .knots
            .get(knot)
            .ok_or_else(|| Error::InvalidInput(format!("no knot {knot}")))?;
        Ok(k.incidences
            .iter()
            .map(|inc| JunctionInterval {
                arc: inc.arc,
                center: inc.s,
                lo: (inc.s - rho * delta).max(0.0),
                hi: (inc.s + rho * delta).min(self.arcs[inc.arc].length()),
            })
            .collect())
    }

    /// Smallest ρ ≥ 1 whose junction pieces cover every point lying in two
    /// incident tubes near the knot, found by sampling the tubes.
    pub fn min_covering_rho(&self, knot: usize, delta: f64) -> f64 {
        let k = &self.knots[knot];
        let mut rho: f64 = 1.0;
        for (p, a) in k.incidences.iter().enumerate() {
            for b in k.incidences.iter().skip(p + 1) {
                if a.arc == b.arc {
                    continue;
                }
                rho = rho.max(covering_one_way(&self.arcs[a.arc], a.s, &self.arcs[b.arc], b.s, delta));
                rho = rho.max(covering_one_way(&self.arcs[b.arc], b.s, &self.arcs[a.arc], a.s, delta));
            }
        }
        rho
    }

    /// ρ used for knot `k` at thickness δ: the declared value, raised to the
    /// sampled covering value when the arcs meet at a shallow angle.
    pub fn effective_rho(&self, knot: usize, delta: f64) -> f64 {
        self.knots[knot].rho.max(self.min_covering_rho(knot, delta))
    }

    /// Run every structural check; never fails, failures are report entries.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = vec![
            self.check_connected(),
            self.check_knot_positions(),
            self.check_knot_incidences(),
            self.check_non_tangency(),
            self.check_intersections(),
            self.check_frames(),
            self.check_closed_arcs(),
        ];
        checks.retain(|c| !c.name.is_empty());
        let rho = (0..self.knots.len())
            .map(|k| KnotRho {
                knot: k,
                declared: self.knots[k].rho,
                min_covering: if self.delta0.is_finite() && self.delta0 > 0.0 {
                    self.min_covering_rho(k, self.delta0)
                } else {
                    1.0
                },
            })
            .collect();
        let usable = checks.iter().all(|c| c.passed);
        ValidationReport {
            checks,
            delta0: self.delta0,
            rho,
            usable,
        }
    }

    fn check_connected(&self) -> Check {
        let n = self.arcs.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for k in &self.knots {
            if let Some(first) = k.incidences.first() {
                for inc in &k.incidences[1..] {
                    let (a, b) = (find(&mut parent, first.arc), find(&mut parent, inc.arc));
                    parent[a] = b;
                }
            }
        }
        let roots: std::collections::BTreeSet<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Check::new(
            "connected",
            roots.len() == 1,
            format!("{} component(s)", roots.len()),
        )
    }

    fn check_knot_positions(&self) -> Check {
        let mut worst: f64 = 0.0;
        let mut bad = vec![];
        for k in &self.knots {
            for inc in &k.incidences {
                let arc = &self.arcs[inc.arc];
                let d = arc
                    .position(inc.s)
                    .map(|p| (p - k.position).norm())
                    .unwrap_or(f64::INFINITY);
                let rel = d / arc.length();
                worst = worst.max(rel);
                if rel > TOL_KNOT {
                    bad.push(format!("knot {} / arc {}", k.id, inc.arc));
                }
            }
        }
        Check::new(
            "knot_positions",
            bad.is_empty(),
            if bad.is_empty() {
                format!("max relative offset {worst:.2e}")
            } else {
                format!("off-curve incidences: {}", bad.join(", "))
            },
        )
    }

    fn check_knot_incidences(&self) -> Check {
        let bad: Vec<String> = self
            .knots
            .iter()
            .filter(|k| k.incidences.len() < 2)
            .map(|k| k.id.to_string())
            .collect();
        Check::new(
            "knot_incidences",
            bad.is_empty(),
            if bad.is_empty() {
                "every knot joins at least two arc ends or crossings".into()
            } else {
                format!("knots with fewer than two incidences: {}", bad.join(", "))
            },
        )
    }

    fn check_non_tangency(&self) -> Check {
        let mut worst: f64 = 0.0;
        let mut bad = vec![];
        for k in &self.knots {
            for (p, a) in k.incidences.iter().enumerate() {
                for b in k.incidences.iter().skip(p + 1) {
                    let (Ok(fa), Ok(fb)) = (
                        self.arcs[a.arc].frame_at(a.s),
                        self.arcs[b.arc].frame_at(b.s),
                    ) else {
                        continue;
                    };
                    let dot = fa.t.dot(&fb.t).abs();
                    worst = worst.max(dot);
                    if dot > 1.0 - TOL_TANGENCY {
                        bad.push(format!("knot {}: arcs {} and {}", k.id, a.arc, b.arc));
                    }
                }
            }
        }
        Check::new(
            "non_tangency",
            bad.is_empty(),
            if bad.is_empty() {
                format!("max |T_i.T_j| = {worst:.6}")
            } else {
                format!("tangent arcs at {}", bad.join("; "))
            },
        )
    }

    fn check_intersections(&self) -> Check {
        let tol = 1e-6 * self.scale();
        let mut bad = vec![];
        for i in 0..self.arcs.len() {
            for j in (i + 1)..self.arcs.len() {
                for (si, sj, d) in close_approaches(&self.arcs[i], &self.arcs[j]) {
                    if d > tol {
                        continue;
                    }
                    let x = self.arcs[i].position(si).unwrap();
                    let declared = self.knots.iter().any(|k| {
                        (k.position - x).norm() <= tol
                            && k.incidence_on(i).any(|a| (a.s - si).abs() <= tol)
                            && k.incidence_on(j).any(|a| (a.s - sj).abs() <= tol)
                    });
                    if !declared {
                        bad.push(format!(
                            "arcs {i} and {j} meet at ({:.6}, {:.6}, {:.6})",
                            x[0], x[1], x[2]
                        ));
                    }
                }
            }
        }
        Check::new(
            "intersections_at_knots",
            bad.is_empty(),
            if bad.is_empty() {
                "no undeclared intersections".into()
            } else {
                bad.join("; ")
            },
        )
    }

    fn check_frames(&self) -> Check {
        let mut worst_orth: f64 = 0.0;
        let mut worst_frenet: f64 = 0.0;
        let mut undefined = vec![];
        for arc in &self.arcs {
            let l = arc.length();
            let h = 1e-4 * l;
            let n = 64;
            let cmax = arc.max_curvature(n).max(1.0 / l);
            for k in 0..=n {
                let s = l * k as f64 / n as f64;
                let f = match arc.frame_at(s) {
                    Ok(f) => f,
                    Err(_) => {
                        undefined.push(format!("arc {} at s={s:.4}", arc.id()));
                        continue;
                    }
                };
                let g = nalgebra::Matrix3::from_columns(&[f.t, f.n, f.b]);
                worst_orth = worst_orth.max((g.transpose() * g - nalgebra::Matrix3::identity()).abs().max());
                if s > h && s < l - h {
                    if let (Ok(a), Ok(b)) = (arc.frame_at(s - h), arc.frame_at(s + h)) {
                        let dt = (b.t - a.t) / (2.0 * h);
                        worst_frenet = worst_frenet.max((dt - f.n * f.curvature).norm() / cmax);
                    }
                }
            }
        }
        let passed = undefined.is_empty() && worst_orth <= TOL_FRAME && worst_frenet <= 1e-5;
        Check::new(
            "frames",
            passed,
            if undefined.is_empty() {
                format!("orthonormality defect {worst_orth:.2e}, relative Frenet defect {worst_frenet:.2e}")
            } else {
                format!("frame undefined: {}", undefined.join(", "))
            },
        )
    }

    fn check_closed_arcs(&self) -> Check {
        let closed: Vec<&ArcGeometry> = self.arcs.iter().filter(|a| a.is_closed()).collect();
        if closed.is_empty() {
            return Check::new("closed_arc_frames", true, "no closed arcs".into());
        }
        let mut worst: f64 = 0.0;
        for arc in &closed {
            if let (Ok(a), Ok(b)) = (arc.frame_at(0.0), arc.frame_at(arc.length())) {
                worst = worst
                    .max((a.t - b.t).norm())
                    .max((a.n - b.n).norm())
                    .max((a.b - b.b).norm());
            } else {
                worst = f64::INFINITY;
            }
        }
        Check::new(
            "closed_arc_frames",
            worst <= TOL_FRAME,
            format!("max frame jump across closure {worst:.2e}"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnotRho {
    pub knot: usize,
    pub declared: f64,
    pub min_covering: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub delta0: f64,
    pub rho: Vec<KnotRho>,
    pub usable: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Local minima of the distance between two arcs, refined by Gauss–Newton:
/// `(s_a, s_b, distance)`.
fn close_approaches(a: &ArcGeometry, b: &ArcGeometry) -> Vec<(f64, f64, f64)> {
    let n = 200;
    let sa = a.sample(n);
    let sb = b.sample(n);
    let step = a.length().max(b.length()) / n as f64;
    let mut out: Vec<(f64, f64, f64)> = vec![];
    let dists: Vec<(f64, f64)> = sa.iter().map(|(_, p)| b.closest_abscissa(p, &sb)).collect();
    for k in 0..sa.len() {
        let d = dists[k].1;
        let left = if k > 0 { dists[k - 1].1 } else { f64::INFINITY };
        let right = if k + 1 < dists.len() { dists[k + 1].1 } else { f64::INFINITY };
        if d <= left && d <= right && d < 2.0 * step {
            let (s, r, dist) = refine_pair(a, b, sa[k].0, dists[k].0);
            if !out
                .iter()
                .any(|o| (o.0 - s).abs() < 1e-9 * a.length() && (o.1 - r).abs() < 1e-9 * b.length())
            {
                out.push((s, r, dist));
            }
        }
    }
    out
}

fn refine_pair(a: &ArcGeometry, b: &ArcGeometry, mut s: f64, mut r: f64) -> (f64, f64, f64) {
    for _ in 0..50 {
        let (Ok(fa), Ok(fb)) = (a.frame_at(s), b.frame_at(r)) else {
            break;
        };
        let d = a.position(s).unwrap() - b.position(r).unwrap();
        let g = [d.dot(&fa.t), -d.dot(&fb.t)];
        let c = fa.t.dot(&fb.t);
        let det = 1.0 - c * c;
        if det < 1e-12 {
            break;
        }
        // Gauss–Newton with J = [T_a, −T_b]: JᵀJ = [[1, −c], [−c, 1]]
        let ds = (g[0] + c * g[1]) / det;
        let dr = (c * g[0] + g[1]) / det;
        let ns = (s - ds).clamp(0.0, a.length());
        let nr = (r - dr).clamp(0.0, b.length());
        let done = (ns - s).abs() + (nr - r).abs() < 1e-15 * (a.length() + b.length());
        s = ns;
        r = nr;
        if done {
            break;
        }
    }
    let d = (a.position(s).unwrap() - b.position(r).unwrap()).norm();
    (s, r, d)
}

/// Global minimum distance between two arcs (sampled, then refined).
fn min_distance(a: &ArcGeometry, b: &ArcGeometry) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let sb = b.sample(200);
    for (s, p) in a.sample(200) {
        let (r, d) = b.closest_abscissa(&p, &sb);
        if d < best.0 {
            best = (d, s, r);
        }
    }
    let (s, r, d) = refine_pair(a, b, best.1, best.2);
    if d < best.0 {
        (d, s, r)
    } else {
        best
    }
}

/// Largest `min(|s − a|, |r − b|)/δ` over sampled points of tube `a` that also
/// lie in tube `b`.
fn covering_one_way(arc: &ArcGeometry, a: f64, other: &ArcGeometry, b: f64, delta: f64) -> f64 {
    let coarse = other.sample(((other.length() / delta) as usize).clamp(64, 4096));
    let step = delta / 32.0;
    let (n_r, n_t) = (8, 32);
    let mut rho: f64 = 1.0;
    for dir in [-1.0, 1.0] {
        let mut k = 0usize;
        loop {
            let s = a + dir * step * k as f64;
            if s < 0.0 || s > arc.length() {
                break;
            }
            let centre = arc.position(s).unwrap();
            let (_, dc) = other.closest_abscissa(&centre, &coarse);
            if dc > 2.0 * delta && k > 0 {
                break;
            }
            for i in 0..=n_r {
                let rr = delta * i as f64 / n_r as f64;
                for j in 0..n_t {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
                    let Ok(x) = arc.tube_point(s, rr * th.cos(), rr * th.sin()) else {
                        continue;
                    };
                    let (r, d) = other.closest_abscissa(&x, &coarse);
                    if d <= delta {
                        rho = rho.max(((s - a).abs()).min((r - b).abs()) / delta);
                    }
                    if i == 0 {
                        break;
                    }
                }
            }
            k += 1;
        }
    }
    rho
}
