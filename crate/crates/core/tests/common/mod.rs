#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use curved_rods::geometry::{ArcSpec, ClampedEnd, CurveSpec, End, KnotSpec, Skeleton, SkeletonSpec};
use curved_rods::solver::{Material, SolverConfig};

pub fn segment(start: [f64; 3], end: [f64; 3], up: [f64; 3]) -> ArcSpec {
    ArcSpec {
        curve: CurveSpec::Segment { start, end },
        frame_override: Some(up),
    }
}

pub fn build(spec: SkeletonSpec) -> Arc<Skeleton> {
    Arc::new(spec.build().expect("valid skeleton"))
}

/// Unit straight arc along x, clamped at the origin.
pub fn cantilever() -> Arc<Skeleton> {
    build(SkeletonSpec {
        arcs: vec![segment([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])],
        knots: vec![],
        clamped: vec![ClampedEnd { arc: 0, end: End::Start }],
        resample_n: None,
    })
}

/// Quarter circle of radius 1 in the xy plane, clamped at angle 0.
pub fn quarter_circle() -> Arc<Skeleton> {
    build(SkeletonSpec {
        arcs: vec![ArcSpec {
            curve: CurveSpec::CircularArc {
                center: [0.0; 3],
                radius: 1.0,
                start_angle: 0.0,
                end_angle: FRAC_PI_2,
                e1: [1.0, 0.0, 0.0],
                e2: [0.0, 1.0, 0.0],
            },
            frame_override: None,
        }],
        knots: vec![],
        clamped: vec![ClampedEnd { arc: 0, end: End::Start }],
        resample_n: None,
    })
}

/// Three unit rods leaving the origin at 120° in the xy plane, clamped at
/// their outer ends; knot 0 is the center.
pub fn star() -> Arc<Skeleton> {
    let arcs = (0..3)
        .map(|i| {
            let t = TAU * i as f64 / 3.0;
            segment([0.0; 3], [t.cos(), t.sin(), 0.0], [0.0, 0.0, 1.0])
        })
        .collect();
    build(SkeletonSpec {
        arcs,
        knots: vec![KnotSpec {
            position: None,
            incidences: vec![(0, 0.0), (1, 0.0), (2, 0.0)],
            rho: 1.0,
        }],
        clamped: (0..3).map(|arc| ClampedEnd { arc, end: End::End }).collect(),
        resample_n: None,
    })
}

/// Two unit rods forming a right angle at (1, 0, 0), clamped at the origin.
pub fn l_frame() -> Arc<Skeleton> {
    build(SkeletonSpec {
        arcs: vec![
            segment([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            segment([1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 0.0, 0.0]),
        ],
        knots: vec![KnotSpec {
            position: None,
            incidences: vec![(0, 1.0), (1, 0.0)],
            rho: 1.0,
        }],
        clamped: vec![ClampedEnd { arc: 0, end: End::Start }],
        resample_n: None,
    })
}

pub fn unit_material() -> Material {
    Material::new(1.0, 1.0).unwrap()
}

pub fn config(h: f64) -> SolverConfig {
    SolverConfig {
        h,
        ..Default::default()
    }
}

/// Tip deflection of a circular cantilever of radius `r` and opening `phi`
/// under a unit load normal to its plane, by the unit-load method with
/// bending stiffness `bend` and torsion stiffness `twist` (composite Simpson).
pub fn castigliano_tip(r: f64, phi: f64, bend: f64, twist: f64) -> f64 {
    let n = 20_000;
    let mut sum = 0.0;
    for k in 0..=n {
        let x = phi * k as f64 / n as f64;
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let mb = r * (phi - x).sin();
        let mt = r * (1.0 - (phi - x).cos());
        sum += w * (mb * mb / bend + mt * mt / twist);
    }
    sum * r * phi / n as f64 / 3.0
}
