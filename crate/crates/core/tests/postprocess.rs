mod common;

use common::*;
use curved_rods::geometry::Vec3;
use curved_rods::loads::{LoadCase, Part};
use curved_rods::postprocess::*;
use curved_rods::solver::solve;
use curved_rods::Error;
use std::f64::consts::FRAC_PI_2;

#[test]
fn star_knot_load_is_balanced() {
    let f = [1.0, 0.5, 0.0];
    let lc = LoadCase::new().with_knot_force(0, [0.0; 3], f);
    let sol = solve(star(), &unit_material(), &lc, &config(0.1)).unwrap();
    let r = knot_equilibrium_residual(&sol.u_e, &sol.material, 0, Vec3::from(f)).unwrap();
    assert!(r.norm() <= 1e-8 * Vec3::from(f).norm(), "{r:?}");
    let table = knot_equilibrium_table(&sol).unwrap();
    assert!(table[0].relative < 1e-8);
}

#[test]
fn out_of_plane_star_load_is_rejected() {
    let lc = LoadCase::new().with_knot_force(0, [0.0; 3], [0.0, 0.0, 1.0]);
    assert!(matches!(
        solve(star(), &unit_material(), &lc, &config(0.1)),
        Err(Error::OrthogonalityViolated { .. })
    ));
}

#[test]
fn equilibrium_detects_perturbations_linearly() {
    let lc = LoadCase::new().with_knot_force(0, [0.0; 3], [1.0, 0.0, 0.0]);
    let sol = solve(star(), &unit_material(), &lc, &config(0.1)).unwrap();
    let f = sol.loads.knot_force(0, Part::Extensional);
    let mut bump = sol.u_e.clone();
    bump.dofs_mut().fill(0.0);
    let node = bump.mesh().knot_node(0);
    for c in 0..3 {
        let d = bump.mesh().dof(node, c).unwrap();
        bump.dofs_mut()[d] = [0.3, -0.2, 0.0][c];
    }
    let base = knot_equilibrium_residual(&sol.u_e, &sol.material, 0, f).unwrap();
    let r1 = knot_equilibrium_residual(&sol.u_e.add(&bump.scaled(1e-3)), &sol.material, 0, f).unwrap();
    let r2 = knot_equilibrium_residual(&sol.u_e.add(&bump.scaled(2e-3)), &sol.material, 0, f).unwrap();
    assert!((r1 - base).norm() > 1e-6);
    assert!(((r2 - base) - (r1 - base) * 2.0).norm() < 1e-12);
}

#[test]
fn pass_through_knot_without_force() {
    let sk = build(curved_rods::geometry::SkeletonSpec {
        arcs: vec![
            segment([0.0; 3], [0.6, 0.0, 0.0], [0.0, 1.0, 0.0]),
            segment([0.6, 0.0, 0.0], [1.5, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ],
        knots: vec![curved_rods::geometry::KnotSpec {
            position: None,
            incidences: vec![(0, 0.6), (1, 0.0)],
            rho: 1.0,
        }],
        clamped: vec![curved_rods::geometry::ClampedEnd {
            arc: 0,
            end: curved_rods::geometry::End::Start,
        }],
        resample_n: None,
    });
    let lc = LoadCase::new()
        .with_density(Part::Extensional, curved_rods::loads::DensityTable::uniform(1, 0.9, [0.7, 0.0, 0.0]))
        .with_point_load(1, 0.9, [0.0; 3], [1.0, 0.0, 0.0]);
    let sol = solve(sk, &unit_material(), &lc, &config(0.1)).unwrap();
    let r = knot_equilibrium_residual(&sol.u_e, &sol.material, 0, Vec3::zeros()).unwrap();
    assert!(r.norm() < 1e-8, "{r:?}");
}

#[test]
fn stress_resultants_and_zero_block_on_a_solution() {
    let l = FRAC_PI_2;
    let lc = LoadCase::new().with_point_load(0, l, [0.0, 0.0, 1.0], [0.0; 3]);
    let sol = solve(quarter_circle(), &unit_material(), &lc, &config(l / 16.0)).unwrap();
    let (r, wr) = curved_rods::linalg::gauss_legendre(4);
    let pi = std::f64::consts::PI;
    for &s in &[0.0, 0.3, 1.1, l] {
        let (axial, _, _, twist) = strain_measures(&sol, 0, s).unwrap();
        let (mut n, mut m) = (0.0, 0.0);
        for (ri, wi) in r.iter().zip(&wr) {
            for j in 0..16 {
                let t = std::f64::consts::TAU * j as f64 / 16.0;
                let (y2, y3) = (ri * t.cos(), ri * t.sin());
                let w = wi * ri * std::f64::consts::TAU / 16.0;
                let sig = limit_stress(&sol, 0, s, y2, y3).unwrap();
                assert_eq!(sig, sig.transpose());
                assert_eq!([sig[(1, 1)], sig[(2, 2)], sig[(1, 2)]], [0.0; 3]);
                n += w * sig[(0, 0)];
                m += w * (y2 * sig[(0, 2)] - y3 * sig[(0, 1)]);
            }
        }
        assert!((n - pi * sol.material.young() * axial).abs() < 1e-10);
        assert!((m - sol.material.mu() * pi / 4.0 * twist).abs() < 1e-10);
    }
    assert!(limit_stress(&sol, 0, 0.5, 0.9, 0.9).is_err());
}

#[test]
fn export_round_trip_and_summary() {
    let l = FRAC_PI_2;
    let lc = LoadCase::new()
        .with_point_load(0, l, [0.0, 0.0, 1.0], [0.0; 3])
        .with_point_load(0, l, [0.0; 3], [0.0, 0.0, 0.0]);
    let sol = solve(quarter_circle(), &unit_material(), &lc, &config(l / 8.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_solution(&sol, dir.path(), ExportOptions::default()).unwrap();
    assert_eq!(files.len(), 3);
    let back = read_arc_csv(&dir.path().join("arc_0.csv")).unwrap();
    assert_eq!(back, arc_rows(&sol, 0).unwrap());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let e = json["energies"]["inextensional"].as_f64().unwrap();
    assert!((e - sol.diagnostics.inextensional.energy).abs() <= 1e-12 * e.abs());
    let poly = std::fs::read_to_string(dir.path().join("polyline.txt")).unwrap();
    assert_eq!(poly.lines().count(), 1 + 17);
    // centroid axial stress at the clamp equals E times the exported strain
    let sig = limit_stress(&sol, 0, 0.0, 0.0, 0.0).unwrap();
    let (axial, ..) = strain_measures(&sol, 0, 0.0).unwrap();
    assert!((sig[(0, 0)] - sol.material.young() * axial).abs() < 1e-14);
}

#[test]
fn empty_table_writes_header_only() {
    let mut buf = vec![];
    write_arc_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{ARC_CSV_HEADER}\n"));
}
