//! Transverse tip load on a straight cantilever; the deflection converges to
//! L³/(3·E/3) = L³/E at second order.

use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::loads::LoadCase;
use curved_rods::solver::{solve, Material, SolverConfig};

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("cantilever.json"))?.build()?);
    let loads = LoadCase::load(&data.join("bending_tip.json"))?;
    let material = Material::new(1.0, 1.0)?;
    let exact = 1.0 / material.young();
    let mut prev: Option<f64> = None;
    println!("{:>6} {:>16} {:>12} {:>7}", "1/h", "tip", "error", "order");
    for n in [8, 16, 32, 64, 128] {
        let config = SolverConfig {
            h: 1.0 / n as f64,
            ..Default::default()
        };
        let sol = solve(skeleton.clone(), &material, &loads, &config)?;
        let tip = sol.displacement(0, 1.0)[1];
        let err = (tip - exact).abs();
        let order = prev.map(|p| format!("{:.3}", (p / err).log2())).unwrap_or_default();
        println!("{n:>6} {tip:>16.12} {err:>12.3e} {order:>7}");
        prev = Some(err);
    }
    Ok(())
}
