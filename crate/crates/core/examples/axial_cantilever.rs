//! Straight cantilever pulled along its axis: the tip moves by L/E.

use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::loads::LoadCase;
use curved_rods::solver::{solve, Material, SolverConfig};

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("cantilever.json"))?.build()?);
    let loads = LoadCase::load(&data.join("axial_tip.json"))?;
    let material = Material::new(1.0, 1.0)?;
    let config = SolverConfig {
        h: 1.0 / 16.0,
        ..Default::default()
    };
    let sol = solve(skeleton, &material, &loads, &config)?;
    let tip = sol.displacement(0, 1.0);
    println!("E = {}", material.young());
    println!("tip displacement {:.12} (expected {:.12})", tip[0], 1.0 / material.young());
    println!("CG iterations {}", sol.diagnostics.extensional.iterations);
    Ok(())
}
