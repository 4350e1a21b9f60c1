//! Acceptance criteria, one PASS/FAIL line each; exits nonzero if any fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::{cantilever, castigliano_tip, config, l_frame, quarter_circle, star, unit_material};
use curved_rods::decomposition::{
    elementary_decompose, estimate_report, grid_for, rigidify_junctions, EstimateOptions, FieldFamily,
    TubeField,
};
use curved_rods::geometry::{ArcGeometry, CurveSpec, Skeleton, Vec3};
use curved_rods::linalg::{bilinear, gauss_legendre};
use curved_rods::loads::{LoadCase, Part};
use curved_rods::postprocess::{knot_equilibrium_residual, limit_stress, strain_measures};
use curved_rods::solver::{coercivity_check, solve, LimitSolution};
use curved_rods::spaces::{
    extensional_norm, k_norm, reduction_identity_defects, DiProjector, Order, SkeletonField, SkeletonMesh,
};
use curved_rods::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn tip_bending(h: f64) -> f64 {
    let lc = LoadCase::new().with_point_load(0, 1.0, [0.0, 1.0, 0.0], [0.0; 3]);
    let sol = solve(cantilever(), &unit_material(), &lc, &config(h)).expect("bending solve");
    sol.displacement(0, 1.0)[1]
}

fn ac1() -> Outcome {
    let t = Instant::now();
    let lc = LoadCase::new().with_point_load(0, 1.0, [0.0; 3], [1.0, 0.0, 0.0]);
    let sol = solve(cantilever(), &unit_material(), &lc, &config(1.0 / 16.0)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();
    let tip = sol.displacement(0, 1.0)[0];
    let rel = (tip - 0.4).abs() / 0.4;
    ensure(
        rel <= 1e-6 && elapsed < 1.0,
        format!("tip {tip:.12} (rel. error {rel:.2e} ≤ 1e-6), {elapsed:.3} s < 1 s"),
    )
}

fn ac2() -> Outcome {
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let errs: Vec<f64> = hs.iter().map(|&h| (tip_bending(h) - 0.4).abs()).collect();
    let rel = errs[2] / 0.4;
    let p1 = (errs[0] / errs[1]).log2();
    let p2 = (errs[1] / errs[2]).log2();
    ensure(
        rel <= 5e-3 && p1 >= 2.0 && p2 >= 2.0,
        format!("rel. error at L/64 {rel:.2e} ≤ 5e-3, observed orders {p1:.10} and {p2:.10} ≥ 2"),
    )
}

fn quarter_circle_solution(h: f64) -> Result<LimitSolution, Error> {
    let lc = LoadCase::new().with_point_load(0, FRAC_PI_2, [0.0, 0.0, 1.0], [0.0; 3]);
    solve(quarter_circle(), &unit_material(), &lc, &config(h))
}

fn ac3() -> Outcome {
    let m = unit_material();
    let oracle = castigliano_tip(1.0, FRAC_PI_2, m.young() / 3.0, m.mu() / 3.0);
    let sol = quarter_circle_solution(FRAC_PI_2 / 64.0).map_err(|e| e.to_string())?;
    let tip = sol.displacement(0, FRAC_PI_2)[2];
    let theta = sol.theta(0, FRAC_PI_2).map_err(|e| e.to_string())?;
    let rel = (tip - oracle).abs() / oracle;
    ensure(
        rel <= 1e-2 && theta.abs() > 1e-6,
        format!("tip {tip:.8} vs oracle {oracle:.8} (rel. {rel:.2e} ≤ 1e-2), Θ(L) = {theta:.6}"),
    )
}

fn ac4() -> Outcome {
    let f = [1.0, 0.0, 0.0];
    let lc = LoadCase::new().with_knot_force(0, [0.0; 3], f);
    let sol = solve(star(), &unit_material(), &lc, &config(0.05)).map_err(|e| e.to_string())?;
    let force = sol.loads.knot_force(0, Part::Extensional);
    let r = knot_equilibrium_residual(&sol.u_e, &sol.material, 0, force).map_err(|e| e.to_string())?;
    let bound = 1e-8 * force.norm();
    let unbalanced = LoadCase::new().with_knot_force(0, [0.0; 3], [0.0, 0.0, 1.0]);
    let rejected = matches!(
        solve(star(), &unit_material(), &unbalanced, &config(0.05)),
        Err(Error::OrthogonalityViolated { .. })
    );
    ensure(
        r.norm() <= bound && rejected,
        format!(
            "residual {:.2e} ≤ {bound:.1e}; out-of-plane knot load rejected: {rejected}",
            r.norm()
        ),
    )
}

fn ac5() -> Outcome {
    let mesh = SkeletonMesh::build(l_frame(), 0.1, Order::P2).map_err(|e| e.to_string())?;
    let proj = DiProjector::new(&mesh).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut idem, mut orth, mut ext) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = SkeletonField::from_dofs(
            &mesh,
            nalgebra::DVector::from_fn(mesh.n_dofs(), |_, _| rng.random_range(-1.0..1.0)),
        );
        let (ui, ue) = proj.project(&u).map_err(|e| e.to_string())?;
        let (uii, _) = proj.project(&ui).map_err(|e| e.to_string())?;
        let scale = k_norm(&u);
        idem = idem.max(k_norm(&uii.sub(&ui)) / scale);
        orth = orth.max(bilinear(proj.gram(), ui.dofs(), ue.dofs()).abs() / (scale * scale));
        ext = ext.max(extensional_norm(&ui) / scale);
    }
    ensure(
        idem <= 1e-10 && orth <= 1e-10 && ext <= 1e-10,
        format!("idempotence {idem:.1e}, K-orthogonality {orth:.1e}, ‖U_I‖_E {ext:.1e} (all ≤ 1e-10)"),
    )
}

fn helix() -> ArcGeometry {
    ArcGeometry::build(
        0,
        &CurveSpec::Helix {
            center: [0.0; 3],
            radius: 1.0,
            pitch: 0.4,
            t0: 0.0,
            t1: 3.0,
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 1.0, 0.0],
        },
        None,
        32,
    )
    .expect("helix")
}

fn ac6() -> Outcome {
    let arc = helix();
    let (g, w) = gauss_legendre(12);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let steps = [0.04, 0.02, 0.01];
    let mut worst_spread = 0.0f64;
    let mut worst_c = 0.0f64;
    for _ in 0..50 {
        // 𝒜 = Σ c_k cos(ω_k s + φ_k), V = ∫₀ˢ 𝒜 × T
        let modes: Vec<(Vec3, f64, f64)> = (0..3)
            .map(|_| {
                (
                    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    rng.random_range(0.2..2.0),
                    rng.random_range(0.0..PI),
                )
            })
            .collect();
        let a = |s: f64| -> Vec3 { modes.iter().map(|(c, om, ph)| c * (om * s + ph).cos()).sum() };
        let v = |s: f64| -> Vec3 {
            let panels = 60;
            let mut acc = Vec3::zeros();
            for p in 0..panels {
                let (x0, x1) = (s * p as f64 / panels as f64, s * (p + 1) as f64 / panels as f64);
                for (x, wt) in g.iter().zip(&w) {
                    let y = x0 + (x1 - x0) * x;
                    acc += a(y).cross(&arc.frenet(y).unwrap().t) * (wt * (x1 - x0));
                }
            }
            acc
        };
        let s0 = rng.random_range(0.5..arc.length() - 0.5);
        let cs: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let d = reduction_identity_defects(&arc, v, a, s0, h).unwrap();
                d.iter().fold(0.0f64, |m, x| m.max(x.abs())) / (h * h)
            })
            .collect();
        let hi = cs.iter().cloned().fold(0.0, f64::max);
        let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_spread = worst_spread.max(hi / lo);
        worst_c = worst_c.max(hi);
    }
    ensure(
        worst_spread <= 1.1,
        format!("max defect/h² over 3 steps varies by factor {worst_spread:.4} ≤ 1.1, C ≤ {worst_c:.3}"),
    )
}

fn free_frame() -> Arc<Skeleton> {
    let sk = l_frame();
    Arc::new(Skeleton::new(sk.arcs.clone(), sk.knots.clone(), vec![]).expect("frame"))
}

fn ac7() -> Outcome {
    // rigid fields
    let mut rigid_res = 0.0f64;
    let (a, b) = (Vec3::new(0.2, -0.1, 0.4), Vec3::new(-0.3, 0.5, 0.1));
    for geo in [helix(), quarter_circle().arcs[0].clone()] {
        let f = TubeField::sample(&geo, 0.05, grid_for(&geo, 0.05, 4, 8), |_, _, _, x| a + b.cross(&x))
            .map_err(|e| e.to_string())?;
        let e = elementary_decompose(&f, &geo).map_err(|e| e.to_string())?;
        let back = e.to_field(&geo, &f).map_err(|e| e.to_string())?;
        let r = f.sub(&back).map_err(|e| e.to_string())?;
        rigid_res = rigid_res.max(r.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }

    // bounded ratio tables
    let families = [
        FieldFamily::Extension {
            strain: 1e-3,
            poisson: 0.3,
        },
        FieldFamily::Bending {
            curvature: 1e-3,
            poisson: 0.3,
        },
        FieldFamily::Torsion {
            twist: 1e-3,
            warping: 0.0,
        },
    ];
    let mut growing = vec![];
    let mut worst_ratio = 0.0f64;
    for sk in [cantilever(), quarter_circle()] {
        for fam in families {
            let rep = estimate_report(&sk, fam, &[0.2, 0.1, 0.05], EstimateOptions::default())
                .map_err(|e| e.to_string())?;
            for row in &rep.rows {
                for r in [
                    row.rod_gradient_ratio,
                    row.rod_l2_ratio,
                    row.rod_line_ratio,
                    row.structure_gradient_ratio,
                    row.structure_l2_ratio,
                    row.structure_line_ratio,
                ] {
                    worst_ratio = worst_ratio.max(r);
                }
            }
            growing.extend(rep.growing.iter().map(|c| format!("{}:{c}", fam.name())));
        }
    }

    // one rigid displacement per knot after rigidification
    let mut deviation = 0.0f64;
    let delta = 0.05;
    for sk in [l_frame(), star(), free_frame()] {
        let fields: Vec<TubeField> = sk
            .arcs
            .iter()
            .map(|geo| {
                TubeField::sample(geo, delta, grid_for(geo, delta, 4, 8), |_, _, _, x| {
                    Vec3::new(x[0] * x[1], (2.0 * x[0]).sin() + x[2], x[1] * x[1] - x[0])
                })
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let elem: Vec<_> = sk
            .arcs
            .iter()
            .zip(&fields)
            .map(|(g, f)| elementary_decompose(f, g))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let rig = rigidify_junctions(&sk, &elem, &fields, delta).map_err(|e| e.to_string())?;
        for (ki, knot) in sk.knots.iter().enumerate() {
            let fit = rig.knots[ki];
            for inc in &knot.incidences {
                let e = &rig.arcs[inc.arc];
                let geo = &sk.arcs[inc.arc];
                for k in 0..e.s.len() {
                    if (e.s[k] - inc.s).abs() <= rig.rho[ki] * delta {
                        let x = geo.position(e.s[k]).map_err(|e| e.to_string())?;
                        deviation = deviation
                            .max((e.u[k] - fit.eval(&x, &knot.position)).norm())
                            .max((e.r[k] - fit.b).norm());
                    }
                }
            }
        }
    }
    ensure(
        rigid_res <= 1e-10 && growing.is_empty() && deviation <= 1e-12,
        format!(
            "rigid residual {rigid_res:.1e} ≤ 1e-10; ratios ≤ {worst_ratio:.3} with no growth {growing:?}; junction deviation {deviation:.1e} ≤ 1e-12"
        ),
    )
}

fn ac8() -> Outcome {
    let mut cases = vec![];
    let solved = |sk, lc: LoadCase, h| solve(sk, &unit_material(), &lc, &config(h)).map_err(|e| e.to_string());
    cases.push(solved(
        cantilever(),
        LoadCase::new().with_point_load(0, 1.0, [0.0; 3], [1.0, 0.0, 0.0]),
        1.0 / 16.0,
    )?);
    cases.push(solved(
        cantilever(),
        LoadCase::new().with_point_load(0, 1.0, [0.0, 1.0, 0.0], [0.0; 3]),
        1.0 / 64.0,
    )?);
    cases.push(quarter_circle_solution(FRAC_PI_2 / 64.0).map_err(|e| e.to_string())?);
    cases.push(solved(star(), LoadCase::new().with_knot_force(0, [0.0; 3], [1.0, 0.0, 0.0]), 0.05)?);
    // unit-disc rule exact for affine integrands
    let (rg, rw) = gauss_legendre(2);
    let nt = 6;
    let mut worst_force = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut worst_zero = 0.0f64;
    let mut samples = 0;
    for sol in &cases {
        let (young, mu) = (sol.material.young(), sol.material.mu());
        for (arc, geo) in sol.skeleton().arcs.iter().enumerate() {
            for k in 0..=10 {
                let s = geo.length() * k as f64 / 10.0;
                let (axial, _, _, twist) = strain_measures(sol, arc, s).map_err(|e| e.to_string())?;
                let (mut force, mut moment, mut scale) = (0.0, 0.0, 1.0f64);
                for (r, wr) in rg.iter().zip(&rw) {
                    for j in 0..nt {
                        let th = 2.0 * PI * j as f64 / nt as f64;
                        let (y2, y3) = (r * th.cos(), r * th.sin());
                        let sig = limit_stress(sol, arc, s, y2, y3).map_err(|e| e.to_string())?;
                        let w = wr * r * 2.0 * PI / nt as f64;
                        force += w * sig[(0, 0)];
                        moment += w * (y2 * sig[(0, 2)] - y3 * sig[(0, 1)]);
                        scale = scale.max(sig.abs().max());
                        worst_zero = worst_zero
                            .max(sig[(1, 1)].abs())
                            .max(sig[(2, 2)].abs())
                            .max(sig[(1, 2)].abs())
                            .max(sig[(2, 1)].abs());
                    }
                }
                worst_force = worst_force.max((force - PI * young * axial).abs() / scale);
                worst_moment = worst_moment.max((moment - mu * PI / 4.0 * twist).abs() / scale);
                samples += 1;
            }
        }
    }
    ensure(
        worst_force <= 1e-10 && worst_moment <= 1e-10 && worst_zero == 0.0,
        format!(
            "{samples} sections: axial resultant {worst_force:.1e}, shear moment {worst_moment:.1e} (≤ 1e-10), zero block max {worst_zero:.1e}"
        ),
    )
}

fn ac9() -> Outcome {
    let m = unit_material();
    let mut mins = vec![];
    for sk in [cantilever(), quarter_circle(), l_frame(), star()] {
        let mesh = SkeletonMesh::build(sk, 0.125, Order::P2).map_err(|e| e.to_string())?;
        let r = coercivity_check(&mesh, &m).map_err(|e| e.to_string())?;
        if !(r.clamped && r.extensional_min > 0.0 && r.inextensional_min > 0.0) {
            return Err(format!("clamped structure not coercive: {r:?}"));
        }
        mins.push(r.extensional_min.min(r.inextensional_min));
    }
    let free = SkeletonMesh::build(free_frame(), 0.125, Order::P2).map_err(|e| e.to_string())?;
    let r = coercivity_check(&free, &m).map_err(|e| e.to_string())?;
    let lowest = mins.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(
        !r.clamped && r.extensional_zero_modes > 0 && r.inextensional_zero_modes > 0,
        format!(
            "clamped minima ≥ {lowest:.3e} > 0; free frame zero modes: extensional {}, inextensional {}",
            r.extensional_zero_modes, r.inextensional_zero_modes
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(msg) => println!("{name} PASS {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name} FAIL {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
