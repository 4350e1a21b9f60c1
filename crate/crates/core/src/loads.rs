//! Load cases for the limit problems and the compatibility condition on the
//! extensional loads.
//!
//! Distributed forces are per-arc tables `(s, F)` interpolated linearly and
//! zero outside the tabulated range. Knot forces act on the knot value of a
//! field; point loads act at an arbitrary abscissa.
//!
//! Extensional loads must not work on inextensional displacements. A load
//! case is therefore either checked against that condition or projected onto
//! it before its extensional right-hand side can be assembled.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::linalg::{self, gauss_legendre, SpdFactor};
use crate::spaces::{gram_matrix, DiProjector, SkeletonMesh};

/// Relative tolerance on the part of the extensional load acting on ker B.
pub const TOL_ORTH: f64 = 1e-9;

const NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthogonalityMode {
    #[default]
    Check,
    Project,
}

/// Force per unit length on one arc: rows `[s, F1, F2, F3]` with increasing `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub arc: usize,
    pub table: Vec<[f64; 4]>,
}

impl DensityTable {
    pub fn uniform(arc: usize, length: f64, f: [f64; 3]) -> Self {
        Self {
            arc,
            table: vec![[0.0, f[0], f[1], f[2]], [length, f[0], f[1], f[2]]],
        }
    }

    pub fn eval(&self, s: f64) -> Vec3 {
        let t = &self.table;
        if t.len() < 2 || s < t[0][0] || s > t[t.len() - 1][0] {
            return Vec3::zeros();
        }
        let k = t
            .windows(2)
            .position(|w| s <= w[1][0])
            .unwrap_or(t.len() - 2);
        let (a, b) = (&t[k], &t[k + 1]);
        let h = b[0] - a[0];
        let x = if h > 0.0 { (s - a[0]) / h } else { 0.0 };
        Vec3::new(
            a[1] + x * (b[1] - a[1]),
            a[2] + x * (b[2] - a[2]),
            a[3] + x * (b[3] - a[3]),
        )
    }

    fn validate(&self) -> Result<()> {
        if self.table.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "load table on arc {} needs at least two rows",
                self.arc
            )));
        }
        if self.table.windows(2).any(|w| !(w[1][0] >= w[0][0])) {
            return Err(Error::InvalidInput(format!(
                "load table on arc {} must have nondecreasing s",
                self.arc
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotForce {
    pub knot: usize,
    #[serde(rename = "f_I", default)]
    pub f_i: [f64; 3],
    #[serde(rename = "f_E", default)]
    pub f_e: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub arc: usize,
    pub s: f64,
    #[serde(rename = "f_I", default)]
    pub f_i: [f64; 3],
    #[serde(rename = "f_E", default)]
    pub f_e: [f64; 3],
}

/// Whether the extensional loads have been checked or projected.
#[derive(Debug, Clone, Default)]
pub enum OrthogonalityStatus {
    #[default]
    Unchecked,
    Checked {
        defect: f64,
    },
    /// Corrected functional, valid for meshes with `n_dofs` unknowns.
    Projected {
        defect: f64,
        functional: DVector<f64>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LoadCase {
    #[serde(rename = "F_I", default)]
    pub density_i: Vec<DensityTable>,
    #[serde(rename = "F_E", default)]
    pub density_e: Vec<DensityTable>,
    #[serde(default)]
    pub knots: Vec<KnotForce>,
    #[serde(default)]
    pub point_loads: Vec<PointLoad>,
    #[serde(default)]
    pub mode: OrthogonalityMode,
    #[serde(skip)]
    status: OrthogonalityStatus,
}

/// Which family of loads a functional is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Inextensional,
    Extensional,
}

impl LoadCase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_density(mut self, part: Part, table: DensityTable) -> Self {
        match part {
            Part::Inextensional => self.density_i.push(table),
            Part::Extensional => self.density_e.push(table),
        }
        self.status = OrthogonalityStatus::Unchecked;
        self
    }

    pub fn with_knot_force(mut self, knot: usize, f_i: [f64; 3], f_e: [f64; 3]) -> Self {
        self.knots.push(KnotForce { knot, f_i, f_e });
        self.status = OrthogonalityStatus::Unchecked;
        self
    }

    pub fn with_point_load(mut self, arc: usize, s: f64, f_i: [f64; 3], f_e: [f64; 3]) -> Self {
        self.point_loads.push(PointLoad { arc, s, f_i, f_e });
        self.status = OrthogonalityStatus::Unchecked;
        self
    }

    pub fn with_mode(mut self, mode: OrthogonalityMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for t in lc.density_i.iter().chain(&lc.density_e) {
            t.validate()?;
        }
        Ok(lc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn status(&self) -> &OrthogonalityStatus {
        &self.status
    }

    /// Total knot force of one family at a knot.
    pub fn knot_force(&self, knot: usize, part: Part) -> Vec3 {
        self.knots
            .iter()
            .filter(|k| k.knot == knot)
            .map(|k| match part {
                Part::Inextensional => Vec3::from(k.f_i),
                Part::Extensional => Vec3::from(k.f_e),
            })
            .sum()
    }

    /// Uncorrected load functional on the vector field space of `mesh`.
    pub fn assemble(&self, mesh: &SkeletonMesh, part: Part, n_gauss: usize) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(mesh.n_dofs());
        let tables = match part {
            Part::Inextensional => &self.density_i,
            Part::Extensional => &self.density_e,
        };
        let (gx, gw) = gauss_legendre(n_gauss.max(1));
        let order = mesh.order();
        for t in tables {
            t.validate()?;
            if t.arc >= mesh.skeleton().arcs.len() {
                return Err(Error::InvalidInput(format!("load on missing arc {}", t.arc)));
            }
            for e in mesh.arc_element_range(t.arc) {
                let el = &mesh.elements()[e];
                // integrate piecewise between table breakpoints
                let mut cuts = vec![el.s0];
                cuts.extend(t.table.iter().map(|r| r[0]).filter(|&s| s > el.s0 && s < el.s1));
                cuts.push(el.s1);
                for w in cuts.windows(2) {
                    let len = w[1] - w[0];
                    if len <= 0.0 {
                        continue;
                    }
                    for (x, wt) in gx.iter().zip(&gw) {
                        let s = w[0] + len * x;
                        let f = t.eval(s);
                        if f == Vec3::zeros() {
                            continue;
                        }
                        let (n, _) = order.shape((s - el.s0) / el.h());
                        for (j, &node) in el.nodes.iter().enumerate() {
                            for c in 0..3 {
                                if let Some(d) = mesh.dof(node, c) {
                                    g[d] += wt * len * n[j] * f[c];
                                }
                            }
                        }
                    }
                }
            }
        }
        for k in &self.knots {
            if k.knot >= mesh.skeleton().knots.len() {
                return Err(Error::InvalidInput(format!("force on missing knot {}", k.knot)));
            }
            let f = match part {
                Part::Inextensional => k.f_i,
                Part::Extensional => k.f_e,
            };
            let node = mesh.knot_node(k.knot);
            for c in 0..3 {
                if let Some(d) = mesh.dof(node, c) {
                    g[d] += f[c];
                }
            }
        }
        for p in &self.point_loads {
            let arc = mesh.skeleton().arc(p.arc)?;
            if p.s < 0.0 || p.s > arc.length() * (1.0 + 1e-12) {
                return Err(Error::OutOfRange {
                    what: "point load abscissa",
                    value: p.s,
                    lo: 0.0,
                    hi: arc.length(),
                });
            }
            let f = match part {
                Part::Inextensional => p.f_i,
                Part::Extensional => p.f_e,
            };
            let (e, xi) = mesh.locate(p.arc, p.s, crate::spaces::Side::Right);
            let el = &mesh.elements()[e];
            let (n, _) = order.shape(xi);
            for (j, &node) in el.nodes.iter().enumerate() {
                for c in 0..3 {
                    if let Some(d) = mesh.dof(node, c) {
                        g[d] += n[j] * f[c];
                    }
                }
            }
        }
        Ok(g)
    }
}

/// Split of an extensional functional against ker B.
#[derive(Debug, Clone)]
pub struct OrthogonalityAnalysis {
    /// `‖r_I‖_K / ‖r‖_K` for the Riesz representer `r = K⁻¹ g`.
    pub defect: f64,
    /// `g − K r_I`, which vanishes on ker B.
    pub enforced: DVector<f64>,
}

pub fn analyze_orthogonality(
    g: &DVector<f64>,
    mesh: &std::sync::Arc<SkeletonMesh>,
    projector: Option<&DiProjector>,
) -> Result<OrthogonalityAnalysis> {
    if g.norm() == 0.0 {
        return Ok(OrthogonalityAnalysis {
            defect: 0.0,
            enforced: g.clone(),
        });
    }
    let k = gram_matrix(mesh)?;
    let spd = SpdFactor::new(k.clone())?;
    let r = spd.solve(g);
    let owned;
    let p = match projector {
        Some(p) => p,
        None => {
            owned = DiProjector::new(mesh)?;
            &owned
        }
    };
    let ri = p.project_dofs(&r)?;
    let kr = linalg::bilinear(&k, &r, &r).max(0.0).sqrt();
    let kri = linalg::bilinear(&k, &ri, &ri).max(0.0).sqrt();
    let mut enforced = g - linalg::spmv(&k, &ri);
    // what is left of a load acting purely on ker B is rounding noise
    if enforced.norm() <= NOISE * g.norm() {
        enforced.fill(0.0);
    }
    Ok(OrthogonalityAnalysis {
        defect: if kr > 0.0 { kri / kr } else { 0.0 },
        enforced,
    })
}

/// Check the extensional loads; errors with `OrthogonalityViolated` when
/// they work on inextensional displacements beyond `tol`.
pub fn check_orthogonality(
    loads: &LoadCase,
    mesh: &std::sync::Arc<SkeletonMesh>,
    tol: f64,
    n_gauss: usize,
) -> Result<LoadCase> {
    let g = loads.assemble(mesh, Part::Extensional, n_gauss)?;
    let a = analyze_orthogonality(&g, mesh, None)?;
    if a.defect > tol {
        return Err(Error::OrthogonalityViolated {
            defect: a.defect,
            tol,
        });
    }
    let mut out = loads.clone();
    out.status = OrthogonalityStatus::Checked { defect: a.defect };
    Ok(out)
}

/// Replace the extensional loads by their part that vanishes on ker B.
/// Inextensional loads are untouched.
pub fn enforce_orthogonality(
    loads: &LoadCase,
    mesh: &std::sync::Arc<SkeletonMesh>,
    n_gauss: usize,
) -> Result<LoadCase> {
    let g = match &loads.status {
        OrthogonalityStatus::Projected { functional, .. } if functional.len() == mesh.n_dofs() => {
            functional.clone()
        }
        _ => loads.assemble(mesh, Part::Extensional, n_gauss)?,
    };
    let a = analyze_orthogonality(&g, mesh, None)?;
    let mut out = loads.clone();
    out.status = OrthogonalityStatus::Projected {
        defect: a.defect,
        functional: a.enforced,
    };
    Ok(out)
}

/// Apply the load case's own mode.
pub fn prepare(
    loads: &LoadCase,
    mesh: &std::sync::Arc<SkeletonMesh>,
    tol: f64,
    n_gauss: usize,
) -> Result<LoadCase> {
    match loads.mode {
        OrthogonalityMode::Check => check_orthogonality(loads, mesh, tol, n_gauss),
        OrthogonalityMode::Project => enforce_orthogonality(loads, mesh, n_gauss),
    }
}

/// Right side of the extensional problem; requires a checked or projected case.
pub fn rhs_extensional(loads: &LoadCase, mesh: &SkeletonMesh, n_gauss: usize) -> Result<DVector<f64>> {
    match &loads.status {
        OrthogonalityStatus::Unchecked => Err(Error::OrthogonalityNotEnforced),
        OrthogonalityStatus::Checked { .. } => loads.assemble(mesh, Part::Extensional, n_gauss),
        OrthogonalityStatus::Projected { functional, .. } => {
            if functional.len() != mesh.n_dofs() {
                return Err(Error::InvalidInput(
                    "loads were projected on a different mesh".into(),
                ));
            }
            Ok(functional.clone())
        }
    }
}

/// Right side of the inextensional problem (distributed, knot and point loads
/// of the inextensional family).
pub fn rhs_inextensional(loads: &LoadCase, mesh: &SkeletonMesh, n_gauss: usize) -> Result<DVector<f64>> {
    loads.assemble(mesh, Part::Inextensional, n_gauss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArcSpec, ClampedEnd, CurveSpec, End, SkeletonSpec};
    use crate::spaces::{Order, SkeletonField};
    use std::sync::Arc;

    fn bar(h: f64, clamped: bool) -> Arc<SkeletonMesh> {
        let sk = SkeletonSpec {
            arcs: vec![ArcSpec {
                curve: CurveSpec::Segment {
                    start: [0.0; 3],
                    end: [1.0, 0.0, 0.0],
                },
                frame_override: Some([0.0, 1.0, 0.0]),
            }],
            knots: vec![],
            clamped: if clamped {
                vec![ClampedEnd { arc: 0, end: End::Start }]
            } else {
                vec![]
            },
            resample_n: None,
        }
        .build()
        .unwrap();
        SkeletonMesh::build(Arc::new(sk), h, Order::P2).unwrap()
    }

    fn tip(f_e: [f64; 3]) -> LoadCase {
        LoadCase {
            point_loads: vec![PointLoad {
                arc: 0,
                s: 1.0,
                f_i: [0.0; 3],
                f_e,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn table_interpolation_and_support() {
        let t = DensityTable {
            arc: 0,
            table: vec![[0.2, 1.0, 0.0, 0.0], [0.6, 3.0, 0.0, 0.0]],
        };
        assert_eq!(t.eval(0.1), Vec3::zeros());
        assert!((t.eval(0.4)[0] - 2.0).abs() < 1e-15);
        assert_eq!(t.eval(0.7), Vec3::zeros());
    }

    #[test]
    fn constant_density_on_constant_field() {
        let mesh = bar(0.3, false);
        let lc = LoadCase {
            density_i: vec![DensityTable::uniform(0, 1.0, [0.5, -1.0, 2.0])],
            ..Default::default()
        };
        let g = rhs_inextensional(&lc, &mesh, 4).unwrap();
        let v = SkeletonField::interpolate(&mesh, |_, _| Vec3::new(1.0, 2.0, 3.0));
        assert!((g.dot(v.dofs()) - (0.5 - 2.0 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn piecewise_table_matches_fine_quadrature() {
        let mesh = bar(0.25, true);
        let t = DensityTable {
            arc: 0,
            table: vec![[0.1, 1.0, -2.0, 0.5], [0.33, -1.0, 0.0, 2.0], [0.9, 2.0, 1.0, 0.0]],
        };
        let lc = LoadCase {
            density_e: vec![t.clone()],
            ..Default::default()
        };
        let g = lc.assemble(&mesh, Part::Extensional, 4).unwrap();
        let v = SkeletonField::interpolate(&mesh, |_, s| Vec3::new(s.sin(), s * s, 1.0 - s));
        let n = 200_000;
        let mut oracle = 0.0;
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            oracle += t.eval(s).dot(&v.value(0, s)) / n as f64;
        }
        assert!((g.dot(v.dofs()) - oracle).abs() < 1e-9 * oracle.abs());
    }

    #[test]
    fn rhs_extensional_requires_a_check() {
        let mesh = bar(0.5, true);
        assert!(matches!(
            rhs_extensional(&tip([1.0, 0.0, 0.0]), &mesh, 4),
            Err(Error::OrthogonalityNotEnforced)
        ));
    }

    #[test]
    fn tangential_tip_load_is_compatible() {
        let mesh = bar(0.25, true);
        let lc = check_orthogonality(&tip([1.0, 0.0, 0.0]), &mesh, TOL_ORTH, 4).unwrap();
        let g0 = lc.assemble(&mesh, Part::Extensional, 4).unwrap();
        let p = enforce_orthogonality(&lc, &mesh, 4).unwrap();
        let g1 = rhs_extensional(&p, &mesh, 4).unwrap();
        assert!((g1 - g0).norm() < 1e-12);
    }

    #[test]
    fn transverse_tip_load_is_rejected_then_projected() {
        let mesh = bar(0.25, true);
        let bad = tip([0.0, 1.0, 0.0]);
        assert!(matches!(
            check_orthogonality(&bad, &mesh, TOL_ORTH, 4),
            Err(Error::OrthogonalityViolated { .. })
        ));
        let p = enforce_orthogonality(&bad, &mesh, 4).unwrap();
        let g = rhs_extensional(&p, &mesh, 4).unwrap();
        // acts on no element of ker B
        let b = linalg::to_dense(&crate::spaces::tangential_constraint(&mesh));
        let z = linalg::null_space(&b, 1e-10);
        assert!(z.ncols() > 0);
        assert!((z.transpose() * &g).amax() < 1e-12);
        // idempotent
        let p2 = enforce_orthogonality(&p, &mesh, 4).unwrap();
        assert!((rhs_extensional(&p2, &mesh, 4).unwrap() - &g).norm() < 1e-12);
    }

    #[test]
    fn projection_matches_dense_oracle() {
        let mesh = bar(0.5, true);
        let lc = LoadCase {
            density_e: vec![DensityTable {
                arc: 0,
                table: vec![[0.0, 0.3, -1.2, 0.7], [1.0, -0.4, 0.9, 2.0]],
            }],
            mode: OrthogonalityMode::Project,
            ..Default::default()
        };
        let g = lc.assemble(&mesh, Part::Extensional, 4).unwrap();
        let p = prepare(&lc, &mesh, TOL_ORTH, 4).unwrap();
        let enforced = rhs_extensional(&p, &mesh, 4).unwrap();
        // g minus its ker-B part: with an orthonormal (in K) basis Z of ker B,
        // the ker-B component of the Riesz representer is Z Zᵀ g
        let k = linalg::to_dense(&gram_matrix(&mesh).unwrap());
        let b = linalg::to_dense(&crate::spaces::tangential_constraint(&mesh));
        let z = linalg::null_space(&b, 1e-10);
        let gz = z.transpose() * &k * &z;
        let chol = gz.cholesky().unwrap();
        let coeff = chol.solve(&(z.transpose() * &g));
        let oracle: DVector<f64> = &g - &k * (&z * coeff);
        assert!((enforced - oracle).norm() < 1e-12 * g.norm());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"F_I": [{"arc": 0, "table": [[0, 0, 1, 0], [1, 0, 1, 0]]}],
                       "knots": [{"knot": 0, "f_E": [1, 0, 0]}],
                       "point_loads": [{"arc": 0, "s": 1.0, "f_I": [0, 0, 1]}],
                       "mode": "project"}"#;
        let lc = LoadCase::from_json(text).unwrap();
        assert_eq!(lc.mode, OrthogonalityMode::Project);
        assert_eq!(lc.knots[0].f_i, [0.0; 3]);
        let back = LoadCase::from_json(&serde_json::to_string(&lc).unwrap()).unwrap();
        assert_eq!(back.point_loads, lc.point_loads);
    }
}
