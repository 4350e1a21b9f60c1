//! Limit stresses over the cross-section at the clamped end of the quarter
//! circle, with the resultants recovered by quadrature.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::linalg::gauss_legendre;
use curved_rods::loads::LoadCase;
use curved_rods::postprocess::{limit_stress, strain_measures};
use curved_rods::solver::{solve, Material, SolverConfig};

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("quarter_circle.json"))?.build()?);
    let loads = LoadCase::load(&data.join("out_of_plane_tip.json"))?;
    let material = Material::new(1.0, 1.0)?;
    let config = SolverConfig {
        h: FRAC_PI_2 / 32.0,
        ..Default::default()
    };
    let sol = solve(skeleton, &material, &loads, &config)?;
    let s = 0.0;
    for (y2, y3) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-0.5, 0.5)] {
        let q = limit_stress(&sol, 0, s, y2, y3)?;
        println!(
            "Y = ({y2:>4}, {y3:>4}): s11 {:>10.6} s12 {:>10.6} s13 {:>10.6}",
            q[(0, 0)],
            q[(0, 1)],
            q[(0, 2)]
        );
    }
    let (axial, _, _, twist) = strain_measures(&sol, 0, s)?;
    let (r, w) = gauss_legendre(2);
    let (mut force, mut moment) = (0.0, 0.0);
    for (ri, wi) in r.iter().zip(&w) {
        for j in 0..8 {
            let th = 2.0 * PI * j as f64 / 8.0;
            let (y2, y3) = (ri * th.cos(), ri * th.sin());
            let q = limit_stress(&sol, 0, s, y2, y3)?;
            let wt = wi * ri * 2.0 * PI / 8.0;
            force += wt * q[(0, 0)];
            moment += wt * (y2 * q[(0, 2)] - y3 * q[(0, 1)]);
        }
    }
    println!("axial resultant {force:.3e} vs {:.3e}", PI * material.young() * axial);
    println!("twisting moment {moment:.6} vs {:.6}", material.mu() * PI / 4.0 * twist);
    Ok(())
}
