//! Three rods meeting at a knot with a force applied at the knot: the axial
//! forces of the rods balance it.

use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::loads::{LoadCase, Part};
use curved_rods::postprocess::{knot_equilibrium_residual, knot_equilibrium_table};
use curved_rods::solver::{solve, Material, SolverConfig};

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("star.json"))?.build()?);
    let material = Material::new(1.0, 1.0)?;
    let config = SolverConfig {
        h: 0.05,
        ..Default::default()
    };
    let loads = LoadCase::load(&data.join("star_knot_load.json"))?;
    let sol = solve(skeleton.clone(), &material, &loads, &config)?;
    for row in knot_equilibrium_table(&sol)? {
        println!("knot {}: force {:?}, relative residual {:.2e}", row.knot, row.force, row.relative);
    }
    let force = sol.loads.knot_force(0, Part::Extensional);
    let r = knot_equilibrium_residual(&sol.u_e, &sol.material, 0, force)?;
    println!("residual vector {:.3e} {:.3e} {:.3e}", r[0], r[1], r[2]);

    // an out-of-plane knot force would work on inextensional motions
    let bad = LoadCase::load(&data.join("star_out_of_plane.json"))?;
    match solve(skeleton, &material, &bad, &config) {
        Err(e) => println!("out-of-plane load: {e}"),
        Ok(_) => println!("out-of-plane load unexpectedly accepted"),
    }
    Ok(())
}
