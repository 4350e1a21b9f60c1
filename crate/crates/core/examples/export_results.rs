//! Solve the loaded L-frame and write per-arc CSV files, a JSON summary and a
//! polyline file into a directory (first argument, default `rod-output`).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::loads::LoadCase;
use curved_rods::postprocess::{export_solution, ExportOptions};
use curved_rods::solver::{solve, Material, SolverConfig};

fn main() -> curved_rods::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "rod-output".into()).into();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("l_frame.json"))?.build()?);
    let loads = LoadCase::load(&data.join("l_frame_loads.json"))?;
    let config = SolverConfig {
        h: 0.05,
        ..Default::default()
    };
    let sol = solve(skeleton, &Material::new(1.0, 1.0)?, &loads, &config)?;
    for path in export_solution(&sol, &out, ExportOptions::default())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
