//! Out-of-plane load on a quarter-circle cantilever. Curvature couples
//! bending and torsion, so the tip twists as well as deflects.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::loads::LoadCase;
use curved_rods::solver::{solve, Material, SolverConfig};

/// Tip deflection from the complementary energy of the bending and twisting
/// moments, with bending stiffness E/3 and torsional stiffness μ/3.
fn energy_method(young: f64, mu: f64) -> f64 {
    let (bend, twist) = (young / 3.0, mu / 3.0);
    3.0 * ((3.0 * std::f64::consts::PI / 4.0 - 2.0) / (3.0 * twist) + (std::f64::consts::PI / 4.0) / (3.0 * bend))
}

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("quarter_circle.json"))?.build()?);
    let loads = LoadCase::load(&data.join("out_of_plane_tip.json"))?;
    let material = Material::new(1.0, 1.0)?;
    let oracle = energy_method(material.young(), material.mu());
    for n in [16, 32, 64] {
        let config = SolverConfig {
            h: FRAC_PI_2 / n as f64,
            ..Default::default()
        };
        let sol = solve(skeleton.clone(), &material, &loads, &config)?;
        let tip = sol.displacement(0, FRAC_PI_2)[2];
        println!(
            "n = {n:>3}: tip {tip:.8}  rel. error {:.2e}  twist at tip {:.6}",
            (tip - oracle).abs() / oracle,
            sol.theta(0, FRAC_PI_2)?
        );
    }
    println!("energy method: {oracle:.8}");
    Ok(())
}
