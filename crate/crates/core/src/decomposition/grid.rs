//! Sampled displacement fields on a tube `]0, L[ × D(O, δ)`.
//!
//! Cross-sections are sampled on a polar lattice of the unit disc (Gauss
//! nodes in the radius, uniform in the angle) and stored in unfolded
//! coordinates `(s, Y₂, Y₃)`; the physical point is `Φ(s, δY₂, δY₃)`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, Vec3};
use crate::linalg::gauss_legendre;

/// Polar lattice of the unit disc times a list of abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeGrid {
    pub s: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl TubeGrid {
    /// `n_s` equally spaced abscissae on `[0, length]`.
    pub fn uniform(length: f64, n_s: usize, n_radial: usize, n_angular: usize) -> Self {
        let s = (0..n_s)
            .map(|k| length * k as f64 / (n_s.max(2) - 1) as f64)
            .collect();
        Self {
            s,
            n_radial,
            n_angular,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.s.len() < 3 || self.n_radial < 2 || self.n_angular < 6 {
            return Err(Error::GridTooCoarse(format!(
                "need at least 3 abscissae, 2 radii and 6 angles, got {}×{}×{}",
                self.s.len(),
                self.n_radial,
                self.n_angular
            )));
        }
        if self.n_radial * self.n_angular < 12 {
            return Err(Error::GridTooCoarse(
                "fewer than 12 samples per cross-section".into(),
            ));
        }
        if self.s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("abscissae must increase".into()));
        }
        Ok(())
    }

    pub fn per_section(&self) -> usize {
        self.n_radial * self.n_angular
    }

    pub fn len(&self) -> usize {
        self.s.len() * self.per_section()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gauss radii on `]0, 1[`.
    pub fn radii(&self) -> Vec<f64> {
        gauss_legendre(self.n_radial).0
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_angular)
            .map(|j| std::f64::consts::TAU * j as f64 / self.n_angular as f64)
            .collect()
    }

    /// `(Y₂, Y₃)` of each cross-section sample, radius-major.
    pub fn disc_points(&self) -> Vec<(f64, f64)> {
        let th = self.angles();
        self.radii()
            .into_iter()
            .flat_map(|r| th.iter().map(move |t| (r * t.cos(), r * t.sin())))
            .collect()
    }

    /// Weights of the unit-disc rule matching [`Self::disc_points`]; they sum to π.
    pub fn disc_weights(&self) -> Vec<f64> {
        let (r, w) = gauss_legendre(self.n_radial);
        let dt = std::f64::consts::TAU / self.n_angular as f64;
        r.iter()
            .zip(&w)
            .flat_map(|(ri, wi)| std::iter::repeat_n(wi * ri * dt, self.n_angular))
            .collect()
    }

    /// Quadrature weights in `s`: Simpson on uniform grids with an odd node
    /// count, trapezoid otherwise.
    pub fn s_weights(&self) -> Vec<f64> {
        let n = self.s.len();
        let h0 = self.s[1] - self.s[0];
        let uniform = self
            .s
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-12 * h0.abs().max(1.0));
        let mut w = vec![0.0; n];
        if uniform && n % 2 == 1 {
            for (k, wk) in w.iter_mut().enumerate() {
                *wk = h0 / 3.0
                    * if k == 0 || k == n - 1 {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
            }
        } else {
            for k in 0..n - 1 {
                let h = self.s[k + 1] - self.s[k];
                w[k] += h / 2.0;
                w[k + 1] += h / 2.0;
            }
        }
        w
    }

    pub fn index(&self, is: usize, ir: usize, it: usize) -> usize {
        (is * self.n_radial + ir) * self.n_angular + it
    }
}

/// Header stored next to the sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeFieldHeader {
    pub arc: usize,
    pub delta: f64,
    pub grid: TubeGrid,
}

#[derive(Debug, Clone)]
pub struct TubeField {
    pub arc: usize,
    pub delta: f64,
    pub grid: TubeGrid,
    /// One displacement per grid point, in [`TubeGrid::index`] order.
    pub values: Vec<Vec3>,
}

impl TubeField {
    pub fn new(arc: usize, delta: f64, grid: TubeGrid, values: Vec<Vec3>) -> Result<Self> {
        grid.check()?;
        if !(delta > 0.0) {
            return Err(Error::OutOfRange {
                what: "delta",
                value: delta,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            arc,
            delta,
            grid,
            values,
        })
    }

    /// Sample `u(s, y₂, y₃, x)` with physical transverse coordinates and the
    /// tube point `x = Φ(s, y₂, y₃)`.
    pub fn sample(
        geo: &ArcGeometry,
        delta: f64,
        grid: TubeGrid,
        u: impl Fn(f64, f64, f64, Vec3) -> Vec3,
    ) -> Result<Self> {
        grid.check()?;
        let disc = grid.disc_points();
        let mut values = Vec::with_capacity(grid.len());
        for &s in &grid.s {
            for &(y2, y3) in &disc {
                let (p, q) = (delta * y2, delta * y3);
                values.push(u(s, p, q, geo.tube_point(s, p, q)?));
            }
        }
        Self::new(geo.id(), delta, grid, values)
    }

    pub fn header(&self) -> TubeFieldHeader {
        TubeFieldHeader {
            arc: self.arc,
            delta: self.delta,
            grid: self.grid.clone(),
        }
    }

    /// `u(s_k, ·)` as a slice over the cross-section.
    pub fn section(&self, k: usize) -> &[Vec3] {
        let n = self.grid.per_section();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * a).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &TubeField) -> Result<Self> {
        if self.grid != other.grid || self.delta != other.delta {
            return Err(Error::InvalidInput("tube fields on different grids".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    /// CSV `s,Y2,Y3,u1,u2,u3`, one row per sample.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "s,Y2,Y3,u1,u2,u3")?;
        let disc = self.grid.disc_points();
        for (k, &s) in self.grid.s.iter().enumerate() {
            for (j, &(y2, y3)) in disc.iter().enumerate() {
                let u = self.values[k * disc.len() + j];
                writeln!(out, "{s:e},{y2:e},{y3:e},{:e},{:e},{:e}", u[0], u[1], u[2])?;
            }
        }
        Ok(())
    }

    /// Write `<stem>.json` (header) and `<stem>.csv` (samples).
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(&self.header())?;
        text.push('\n');
        std::fs::write(dir.join(format!("{stem}.json")), text)?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.csv")))?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let header: TubeFieldHeader = serde_json::from_str(&std::fs::read_to_string(
            dir.join(format!("{stem}.json")),
        )?)
        .map_err(|e| Error::Parse(e.to_string()))?;
        let path = dir.join(format!("{stem}.csv"));
        let file = std::fs::File::open(&path)?;
        let disc = header.grid.disc_points();
        let mut values = vec![];
        for (n, line) in BufReader::new(file).lines().enumerate().skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse()).collect();
            let v = v.map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), n + 1)))?;
            if v.len() != 6 {
                return Err(Error::Parse(format!("{}:{}: expected 6 columns", path.display(), n + 1)));
            }
            let i = values.len();
            let per = disc.len();
            let (ks, kd) = (i / per, i % per);
            let ok = ks < header.grid.s.len()
                && (v[0] - header.grid.s[ks]).abs() <= 1e-12 * header.grid.s[ks].abs().max(1.0)
                && (v[1] - disc[kd].0).abs() <= 1e-12
                && (v[2] - disc[kd].1).abs() <= 1e-12;
            if !ok {
                return Err(Error::Parse(format!(
                    "{}:{}: sample does not match the header grid",
                    path.display(),
                    n + 1
                )));
            }
            values.push(Vec3::new(v[3], v[4], v[5]));
        }
        Self::new(header.arc, header.delta, header.grid, values)
    }
}

/// One sample with its transverse coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub y2: f64,
    pub y3: f64,
    pub u: Vec3,
}

/// Samples of a tube field at physical transverse coordinates `(y₂, y₃)`.
pub fn physical_samples(field: &TubeField) -> Vec<Sample> {
    let disc = field.grid.disc_points();
    let d = field.delta;
    field
        .grid
        .s
        .iter()
        .flat_map(|&s| disc.iter().map(move |&(a, b)| (s, d * a, d * b)))
        .zip(&field.values)
        .map(|((s, y2, y3), &u)| Sample { s, y2, y3, u })
        .collect()
}

/// Unfolding: the same values indexed by `(s, y₂/δ, y₃/δ)`.
pub fn unfold(samples: &[Sample], delta: f64) -> Vec<Sample> {
    samples
        .iter()
        .map(|p| Sample {
            y2: p.y2 / delta,
            y3: p.y3 / delta,
            ..*p
        })
        .collect()
}

/// Inverse of [`unfold`].
pub fn refold(samples: &[Sample], delta: f64) -> Vec<Sample> {
    samples
        .iter()
        .map(|p| Sample {
            y2: p.y2 * delta,
            y3: p.y3 * delta,
            ..*p
        })
        .collect()
}

/// Finite-difference weights for the first derivative at `x0` from the nodes
/// `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let m = 1;
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[1]).collect()
}

/// Derivative stencils along `xs`: for each node, `(first index, weights)` of
/// a five-point (or shorter) window, shifted inward at the ends.
pub fn derivative_stencils(xs: &[f64]) -> Vec<(usize, Vec<f64>)> {
    let n = xs.len();
    let width = n.min(5);
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(width / 2).min(n - width);
            (start, fd_weights(xs[k], &xs[start..start + width]))
        })
        .collect()
}

/// Differentiation matrix of the polynomial interpolant on `xs`.
pub fn lagrange_derivative_matrix(xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| fd_weights(x, xs)).collect()
}

/// Differentiation matrix of the trigonometric interpolant on `n` equally
/// spaced angles.
pub fn trig_derivative_matrix(n: usize) -> Vec<Vec<f64>> {
    let h = std::f64::consts::TAU / n as f64;
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    if j == k {
                        return 0.0;
                    }
                    let d = j as f64 - k as f64;
                    let sign = if (j as i64 - k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let x = d * h / 2.0;
                    if n % 2 == 0 {
                        0.5 * sign / x.tan()
                    } else {
                        0.5 * sign / x.sin()
                    }
                })
                .collect()
        })
        .collect()
}
