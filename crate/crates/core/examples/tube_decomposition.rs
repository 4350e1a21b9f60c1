//! Sample synthetic displacements on thin tubes around a quarter circle and
//! print how the estimate ratios behave as the thickness decreases.

use std::path::Path;
use std::sync::Arc;

use curved_rods::decomposition::{estimate_report, EstimateOptions, FieldFamily};
use curved_rods::geometry::SkeletonSpec;

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = Arc::new(SkeletonSpec::load(&data.join("quarter_circle.json"))?.build()?);
    let families = [
        FieldFamily::Extension { strain: 1e-3, poisson: 0.3 },
        FieldFamily::Bending { curvature: 1e-3, poisson: 0.3 },
        FieldFamily::Torsion { twist: 1e-3, warping: 0.0 },
    ];
    for family in families {
        let report = estimate_report(&skeleton, family, &[0.2, 0.1, 0.05, 0.025], EstimateOptions::default())?;
        println!("{}", family.name());
        println!("  {:>7} {:>11} {:>11} {:>11} {:>11}", "delta", "grad", "l2", "line", "splitting");
        for r in &report.rows {
            println!(
                "  {:>7.3} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
                r.delta,
                r.structure_gradient_ratio,
                r.structure_l2_ratio,
                r.structure_line_ratio,
                r.splitting_ratio.unwrap_or(f64::NAN)
            );
        }
        if !report.growing.is_empty() {
            println!("  growing: {:?}", report.growing);
        }
    }
    Ok(())
}
