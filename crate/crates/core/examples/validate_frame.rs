//! Check the geometric hypotheses of a two-rod frame and of a skeleton with
//! tangent rods.

use std::path::Path;

use curved_rods::geometry::SkeletonSpec;

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    for name in ["l_frame.json", "tangent_arcs.json"] {
        let skeleton = SkeletonSpec::load(&data.join(name))?.build()?;
        let report = skeleton.validate();
        println!("{name}: usable = {}, delta0 = {:.4}", report.usable, report.delta0);
        for c in &report.checks {
            println!("  [{}] {:<24} {}", if c.passed { "ok" } else { "!!" }, c.name, c.detail);
        }
    }
    Ok(())
}
