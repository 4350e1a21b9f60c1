//! Smallest generalized eigenvalues of both reduced forms, on a clamped frame
//! and on the same frame with nothing clamped.

use std::path::Path;
use std::sync::Arc;

use curved_rods::geometry::{Skeleton, SkeletonSpec};
use curved_rods::solver::{coercivity_check, Material};
use curved_rods::spaces::{Order, SkeletonMesh};

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let clamped = SkeletonSpec::load(&data.join("l_frame.json"))?.build()?;
    let free = Skeleton::new(clamped.arcs.clone(), clamped.knots.clone(), vec![])?;
    let material = Material::new(1.0, 1.0)?;
    for (name, sk) in [("clamped", clamped), ("free", free)] {
        for h in [0.25, 0.125] {
            let mesh = SkeletonMesh::build(Arc::new(sk.clone()), h, Order::P2)?;
            let r = coercivity_check(&mesh, &material)?;
            println!(
                "{name:>8} h = {h:<6} extensional min {:.4e} ({} zero modes), inextensional min {:.4e} ({} zero modes)",
                r.extensional_min, r.extensional_zero_modes, r.inextensional_min, r.inextensional_zero_modes
            );
        }
    }
    Ok(())
}
