use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};

use super::*;
use crate::geometry::{ArcGeometry, CurveSpec, Vec3};
use crate::spaces::test_support::l_frame;

fn straight(length: f64) -> ArcGeometry {
    ArcGeometry::build(
        0,
        &CurveSpec::Segment {
            start: [0.0; 3],
            end: [length, 0.0, 0.0],
        },
        Some([0.0, 1.0, 0.0]),
        32,
    )
    .unwrap()
}

fn helix() -> ArcGeometry {
    ArcGeometry::build(
        0,
        &CurveSpec::Helix {
            center: [0.0; 3],
            radius: 1.0,
            pitch: 0.3,
            t0: 0.0,
            t1: 1.5,
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 1.0, 0.0],
        },
        None,
        64,
    )
    .unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn fd_weights_are_exact_on_quartics() {
    let xs = [0.0, 0.13, 0.4, 0.55, 0.9];
    for &x0 in &[0.0, 0.3, 0.9] {
        let w = fd_weights(x0, &xs);
        for p in 0..5 {
            let d: f64 = xs.iter().zip(&w).map(|(x, wk)| wk * x.powi(p)).sum();
            let exact = if p == 0 { 0.0 } else { p as f64 * x0.powi(p - 1) };
            assert!((d - exact).abs() < 1e-11, "p={p} x0={x0}: {d} vs {exact}");
        }
    }
}

#[test]
fn trig_matrix_differentiates_low_modes() {
    for n in [8, 9] {
        let d = trig_derivative_matrix(n);
        let th: Vec<f64> = (0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect();
        for k in 1..(n - 1) / 2 + 1 {
            if 2 * k == n {
                continue;
            }
            let k = k as f64;
            for j in 0..n {
                let ds: f64 = (0..n).map(|m| d[j][m] * (k * th[m]).sin()).sum();
                let dc: f64 = (0..n).map(|m| d[j][m] * (k * th[m]).cos()).sum();
                assert!((ds - k * (k * th[j]).cos()).abs() < 1e-12);
                assert!((dc + k * (k * th[j]).sin()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn lagrange_matrix_is_exact_on_polynomials() {
    let g = TubeGrid::uniform(1.0, 3, 4, 8);
    let r = g.radii();
    let d = lagrange_derivative_matrix(&r);
    for i in 0..r.len() {
        let v: f64 = (0..r.len()).map(|k| d[i][k] * r[k].powi(3)).sum();
        assert!((v - 3.0 * r[i] * r[i]).abs() < 1e-11);
    }
}

#[test]
fn quadrature_weights() {
    let g = TubeGrid::uniform(2.0, 9, 3, 7);
    assert!(close(g.disc_weights().iter().sum(), std::f64::consts::PI, 1e-14));
    let int: f64 = g.s.iter().zip(g.s_weights()).map(|(s, w)| w * s * s).sum();
    assert!(close(int, 8.0 / 3.0, 1e-14));
    // even count falls back to the trapezoid rule
    let g = TubeGrid::uniform(1.0, 4, 3, 7);
    assert!(close(g.s_weights().iter().sum(), 1.0, 1e-14));
}

#[test]
fn coarse_grids_are_rejected() {
    assert!(TubeGrid::uniform(1.0, 2, 4, 8).check().is_err());
    assert!(TubeGrid::uniform(1.0, 5, 2, 5).check().is_err());
    assert!(TubeGrid::uniform(1.0, 5, 2, 6).check().is_ok());
}

#[test]
fn jacobian_matches_finite_differences() {
    let geo = helix();
    let (s, y2, y3) = (0.7, 0.05, -0.03);
    let j = tube_jacobian(&geo.frame_at(s).unwrap(), y2, y3);
    let h = 1e-6;
    let p = |a: f64, b: f64, c: f64| geo.tube_point(a, b, c).unwrap();
    let fd = Matrix3::from_columns(&[
        (p(s + h, y2, y3) - p(s - h, y2, y3)) / (2.0 * h),
        (p(s, y2 + h, y3) - p(s, y2 - h, y3)) / (2.0 * h),
        (p(s, y2, y3 + h) - p(s, y2, y3 - h)) / (2.0 * h),
    ]);
    assert!((j - fd).norm() < 1e-7, "{}", (j - fd).norm());
}

#[test]
fn rigid_field_has_no_strain() {
    let geo = helix();
    let delta = 0.05;
    let (a, b) = (Vec3::new(0.1, -0.2, 0.3), Vec3::new(0.3, 0.1, -0.4));
    let f = TubeField::sample(&geo, delta, grid_for(&geo, delta, 4, 8), |_, _, _, x| a + b.cross(&x)).unwrap();
    let e = energy_functionals(&f, &geo).unwrap();
    let vol = std::f64::consts::PI * delta * delta * geo.length();
    assert!(e.strain < 1e-9 * e.gradient, "{e:?}");
    assert!(close(e.gradient, 2.0 * b.norm_squared() * vol, 1e-7));
}

#[test]
fn linear_field_strain_energy() {
    let g = Matrix3::new(0.3, 0.1, -0.2, 0.1, -0.5, 0.4, -0.2, 0.4, 0.2);
    let expected = |geo: &ArcGeometry, delta: f64| (g * g).trace() * std::f64::consts::PI * delta * delta * geo.length();
    for geo in [straight(1.5), helix()] {
        let delta = 0.04;
        let f = TubeField::sample(&geo, delta, grid_for(&geo, delta, 4, 8), |_, _, _, x| g * x).unwrap();
        let e = energy_functionals(&f, &geo).unwrap();
        assert!(close(e.strain, expected(&geo, delta), 1e-7), "{} vs {}", e.strain, expected(&geo, delta));
        assert!(close(e.gradient, e.strain, 1e-7));
    }
}

#[test]
fn l2_norm_scales_with_section_area() {
    let geo = straight(1.0);
    let norms: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&d| {
            let f = TubeField::sample(&geo, d, grid_for(&geo, d, 3, 6), |s, _, _, _| Vec3::new(s, 1.0, 0.0)).unwrap();
            l2_squared(&f, &geo).unwrap() / (d * d)
        })
        .collect();
    assert!(close(norms[0], std::f64::consts::PI * (1.0 / 3.0 + 1.0), 1e-12));
    assert!(close(norms[0], norms[1], 1e-12));
}

#[test]
fn unfold_refold_roundtrip() {
    let geo = helix();
    let f = TubeField::sample(&geo, 0.1, TubeGrid::uniform(geo.length(), 5, 3, 6), |s, y2, y3, _| {
        Vec3::new(s, y2, y3)
    })
    .unwrap();
    let p = physical_samples(&f);
    let u = unfold(&p, 0.1);
    assert!(u.iter().all(|q| q.y2.hypot(q.y3) < 1.0));
    let back = refold(&u, 0.1);
    for (a, b) in p.iter().zip(&back) {
        assert!((a.y2 - b.y2).abs() < 1e-15 && (a.y3 - b.y3).abs() < 1e-15);
        assert_eq!(a.u, Vec3::new(a.s, a.y2, a.y3));
    }
}

fn elementary_field(geo: &ArcGeometry, delta: f64) -> (TubeField, impl Fn(f64) -> (Vec3, Vec3)) {
    let ur = |s: f64| {
        (
            Vec3::new(s.sin(), 0.3 * s * s, -s),
            Vec3::new(0.2 * s, (2.0 * s).cos(), 0.5),
        )
    };
    let f = TubeField::sample(geo, delta, grid_for(geo, delta, 4, 8), |s, y2, y3, _| {
        let fr = geo.frame_at(s).unwrap();
        let (u, r) = ur(s);
        u + r.cross(&(fr.n * y2 + fr.b * y3))
    })
    .unwrap();
    (f, ur)
}

#[test]
fn elementary_fields_are_fixed_points() {
    let geo = helix();
    let (f, ur) = elementary_field(&geo, 0.05);
    let e = elementary_decompose(&f, &geo).unwrap();
    for k in 0..e.s.len() {
        let (u, r) = ur(e.s[k]);
        assert!((e.u[k] - u).norm() < 1e-12);
        assert!((e.r[k] - r).norm() < 1e-11);
    }
    let back = e.to_field(&geo, &f).unwrap();
    assert!(f.sub(&back).unwrap().values.iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn elementary_fit_of_rigid_field() {
    let geo = helix();
    let (a, b) = (Vec3::new(1.0, 2.0, 3.0), Vec3::new(-0.1, 0.4, 0.2));
    let f = TubeField::sample(&geo, 0.05, grid_for(&geo, 0.05, 3, 6), |_, _, _, x| a + b.cross(&x)).unwrap();
    let e = elementary_decompose(&f, &geo).unwrap();
    for k in 0..e.s.len() {
        let m = geo.position(e.s[k]).unwrap();
        assert!((e.u[k] - (a + b.cross(&m))).norm() < 1e-12);
        assert!((e.r[k] - b).norm() < 1e-11);
    }
}

#[test]
fn elementary_fit_matches_dense_least_squares() {
    let geo = helix();
    let delta = 0.08;
    let f = TubeField::sample(&geo, delta, TubeGrid::uniform(geo.length(), 5, 3, 7), |s, y2, y3, _| {
        Vec3::new((5.0 * y2 + s).sin(), y3 * y3 * 40.0, (y2 * y3 * 100.0).exp())
    })
    .unwrap();
    let e = elementary_decompose(&f, &geo).unwrap();
    let disc = f.grid.disc_points();
    let w = f.grid.disc_weights();
    for k in 0..f.grid.s.len() {
        let fr = geo.frame_at(f.grid.s[k]).unwrap();
        let mut a = DMatrix::zeros(3 * disc.len(), 6);
        let mut rhs = DVector::zeros(3 * disc.len());
        for (j, &(y2, y3)) in disc.iter().enumerate() {
            let sw = w[j].sqrt();
            let y = fr.n * (delta * y2) + fr.b * (delta * y3);
            // r × y = −[y]ₓ r
            let yx = y.cross_matrix();
            for c in 0..3 {
                a[(3 * j + c, c)] = sw;
                for d in 0..3 {
                    a[(3 * j + c, 3 + d)] = -sw * yx[(c, d)];
                }
                rhs[3 * j + c] = sw * f.section(k)[j][c];
            }
        }
        let x = (a.transpose() * &a).lu().solve(&(a.transpose() * &rhs)).unwrap();
        assert!((e.u[k] - Vec3::new(x[0], x[1], x[2])).norm() < 1e-10);
        assert!((e.r[k] - Vec3::new(x[3], x[4], x[5])).norm() < 1e-8, "{} {}", e.r[k], Vec3::new(x[3], x[4], x[5]));
    }
}

fn cloud(n: usize, center: Vec3, radius: f64) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            center + Vec3::new((1.3 * t).sin(), (2.1 * t + 0.5).cos(), (0.7 * t).sin() * (0.4 * t).cos()) * radius
        })
        .collect()
}

#[test]
fn ball_fit_recovers_rigid_motions() {
    let c = Vec3::new(1.0, 0.5, -0.2);
    let rigid = Rigid {
        a: Vec3::new(0.3, -0.1, 0.2),
        b: Vec3::new(0.05, 0.2, -0.7),
    };
    let samples: Vec<(Vec3, Vec3)> = cloud(30, c, 0.01).into_iter().map(|x| (x, rigid.eval(&x, &c))).collect();
    let fit = rigid_fit_ball(&samples, c).unwrap();
    assert!((fit.a - rigid.a).norm() < 1e-12);
    assert!((fit.b - rigid.b).norm() < 1e-9);
    let constant: Vec<(Vec3, Vec3)> = samples.iter().map(|(x, _)| (*x, Vec3::new(1.0, 2.0, 3.0))).collect();
    let fit = rigid_fit_ball(&constant, c).unwrap();
    assert!((fit.a - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-12 && fit.b.norm() < 1e-9);
    assert!(rigid_fit_ball(&samples[..19], c).is_err());
}

#[test]
fn ball_fit_agrees_with_dense_oracle() {
    let c = Vec3::new(0.0, 1.0, 0.0);
    let samples: Vec<(Vec3, Vec3)> = cloud(40, c, 0.02)
        .into_iter()
        .map(|x| (x, Vec3::new((x[0] * 30.0).sin(), x[1] * x[2], (x[2] * 50.0).cos())))
        .collect();
    let (p, q) = (rigid_fit_ball(&samples, c).unwrap(), rigid_fit_dense(&samples, c).unwrap());
    assert!((p.a - q.a).norm() < 1e-10);
    assert!((p.b - q.b).norm() < 1e-7 * q.b.norm().max(1.0));
}

#[test]
fn cutoff_profile() {
    let rho = 1.5;
    for t in [0.0, 0.7, 1.5, -1.5] {
        assert_eq!(cutoff_m(t, rho), 0.0);
    }
    for t in [2.5, 3.0, -7.0] {
        assert_eq!(cutoff_m(t, rho), 1.0);
    }
    let mut prev = 0.0;
    for k in 0..=100 {
        let t = rho + k as f64 / 100.0;
        let m = cutoff_m(t, rho);
        assert_eq!(m, cutoff_m(-t, rho));
        assert!(m >= prev);
        prev = m;
    }
    assert_eq!(cutoff_m(rho + 0.5, rho), 0.5);
    // flat at both ends of the transition
    let h = 1e-5;
    assert!((cutoff_m(rho + h, rho) / h) < 1e-8);
    assert!(((1.0 - cutoff_m(rho + 1.0 - h, rho)) / h) < 1e-8);
}

fn frame_fields(delta: f64, u: impl Fn(Vec3) -> Vec3) -> (Arc<crate::geometry::Skeleton>, Vec<TubeField>) {
    let sk = l_frame();
    let fields = sk
        .arcs
        .iter()
        .map(|geo| TubeField::sample(geo, delta, grid_for(geo, delta, 4, 8), |_, _, _, x| u(x)).unwrap())
        .collect();
    (sk, fields)
}

#[test]
fn rigidify_leaves_rigid_fields_unchanged() {
    let (a, b) = (Vec3::new(0.1, 0.2, 0.3), Vec3::new(0.0, -0.5, 0.25));
    let (sk, fields) = frame_fields(0.05, |x| a + b.cross(&x));
    let elem: Vec<_> = sk.arcs.iter().zip(&fields).map(|(g, f)| elementary_decompose(f, g).unwrap()).collect();
    let rig = rigidify_junctions(&sk, &elem, &fields, 0.05).unwrap();
    for (p, q) in elem.iter().zip(&rig.arcs) {
        for k in 0..p.s.len() {
            assert!((p.u[k] - q.u[k]).norm() < 1e-12);
            assert!((p.r[k] - q.r[k]).norm() < 1e-9);
        }
    }
    assert!((rig.knots[0].b - b).norm() < 1e-9);
}

#[test]
fn rigidified_displacement_is_rigid_near_the_knot() {
    let delta = 0.05;
    let (sk, fields) = frame_fields(delta, |x| Vec3::new(x[0] * x[1], (3.0 * x[0]).sin(), x[1] * x[1]));
    let elem: Vec<_> = sk.arcs.iter().zip(&fields).map(|(g, f)| elementary_decompose(f, g).unwrap()).collect();
    let rig = rigidify_junctions(&sk, &elem, &fields, delta).unwrap();
    let knot = &sk.knots[0];
    let fit = rig.knots[0];
    let rho = rig.rho[0];
    let mut checked = 0;
    for (geo, e) in sk.arcs.iter().zip(&rig.arcs) {
        let inc = knot.incidences.iter().find(|i| i.arc == e.arc).unwrap();
        for k in 0..e.s.len() {
            if (e.s[k] - inc.s).abs() <= rho * delta {
                let x = geo.position(e.s[k]).unwrap();
                assert!((e.u[k] - fit.eval(&x, &knot.position)).norm() <= 1e-12);
                assert!((e.r[k] - fit.b).norm() <= 1e-12);
                checked += 1;
            }
        }
    }
    assert!(checked >= 4);
    // away from the junction nothing changes
    let last = rig.arcs[1].s.len() - 1;
    assert_eq!(rig.arcs[1].u[last], elem[1].u[last]);
}

#[test]
fn tube_field_io_roundtrip() {
    let geo = helix();
    let f = TubeField::sample(&geo, 0.07, TubeGrid::uniform(geo.length(), 6, 3, 6), |s, y2, y3, _| {
        Vec3::new(s.exp(), y2 / 3.0, y3 * 1e-7)
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    f.save(dir.path(), "arc_0").unwrap();
    let g = TubeField::load(dir.path(), "arc_0").unwrap();
    assert_eq!(f.header(), g.header());
    assert_eq!(f.values, g.values);
}

fn cantilever() -> Arc<crate::geometry::Skeleton> {
    use crate::geometry::{ArcSpec, ClampedEnd, End, SkeletonSpec};
    Arc::new(
        SkeletonSpec {
            arcs: vec![ArcSpec {
                curve: CurveSpec::Segment {
                    start: [0.0; 3],
                    end: [1.0, 0.0, 0.0],
                },
                frame_override: Some([0.0, 1.0, 0.0]),
            }],
            knots: vec![],
            clamped: vec![ClampedEnd { arc: 0, end: End::Start }],
            resample_n: None,
        }
        .build()
        .unwrap(),
    )
}

#[test]
fn ratios_are_homogeneous() {
    let sk = cantilever();
    let r = |strain| {
        estimate_report(&sk, FieldFamily::Extension { strain, poisson: 0.3 }, &[0.1], EstimateOptions::default())
            .unwrap()
            .rows[0]
            .clone()
    };
    let (a, b) = (r(1e-3), r(-2.5));
    assert!(close(b.strain_energy, a.strain_energy * 2500.0 * 2500.0, 1e-10));
    for (x, y) in [
        (a.rod_gradient_ratio, b.rod_gradient_ratio),
        (a.rod_l2_ratio, b.rod_l2_ratio),
        (a.structure_line_ratio, b.structure_line_ratio),
        (a.splitting_ratio.unwrap(), b.splitting_ratio.unwrap()),
    ] {
        assert!(close(x, y, 1e-9), "{x} vs {y}");
    }
}

fn free_frame() -> Arc<crate::geometry::Skeleton> {
    let sk = l_frame();
    Arc::new(crate::geometry::Skeleton::new(sk.arcs.clone(), sk.knots.clone(), vec![]).unwrap())
}

#[test]
fn rigid_family_has_zero_numerators() {
    let rep = estimate_report(
        &free_frame(),
        FieldFamily::Rigid {
            a: [0.0; 3],
            b: [0.0, 0.0, 1.0],
        },
        &[0.1, 0.05],
        EstimateOptions::default(),
    )
    .unwrap();
    for row in &rep.rows {
        assert!(row.strain_energy < 1e-20);
        for v in [
            row.rod_gradient_ratio,
            row.rod_l2_ratio,
            row.rod_line_ratio,
            row.blend_ratio,
            row.structure_gradient_ratio,
            row.structure_l2_ratio,
            row.structure_line_ratio,
        ] {
            assert_eq!(v, 0.0, "{row:?}");
        }
        assert!(row.splitting_ratio.is_none());
    }
}

#[test]
fn local_families_jump_at_knots_and_are_flagged() {
    let rep = estimate_report(
        &l_frame(),
        FieldFamily::Bending {
            curvature: 0.5,
            poisson: 0.3,
        },
        &[0.2, 0.1, 0.05],
        EstimateOptions::default(),
    )
    .unwrap();
    assert!(rep.growing.iter().any(|c| c == "structure_gradient_ratio"));
    // the per-rod fit does not see the jump
    assert!(!rep.growing.iter().any(|c| c == "rod_gradient_ratio"));
}

#[test]
fn smooth_ratios_stay_bounded() {
    let rep = estimate_report(
        &l_frame(),
        FieldFamily::Cartesian {
            grad: [[0.01, 0.02, 0.0], [-0.03, 0.0, 0.01], [0.0, 0.02, -0.01]],
            bending: 0.5,
            poisson: 0.3,
        },
        &[0.2, 0.1, 0.05],
        EstimateOptions::default(),
    )
    .unwrap();
    assert!(rep.growing.is_empty(), "{:#?}", rep);
    for row in &rep.rows {
        assert!(row.rod_gradient_ratio.is_finite() && row.splitting_ratio.unwrap().is_finite());
    }
}
