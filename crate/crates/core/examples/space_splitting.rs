//! Split a random skeleton field into its inextensional part (zero
//! tangential derivative) and the K-orthogonal remainder.

use std::path::Path;

use curved_rods::geometry::SkeletonSpec;
use curved_rods::linalg::bilinear;
use curved_rods::spaces::{extensional_norm, k_norm, DiProjector, Order, SkeletonField, SkeletonMesh};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> curved_rods::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let skeleton = std::sync::Arc::new(SkeletonSpec::load(&data.join("l_frame.json"))?.build()?);
    let mesh = SkeletonMesh::build(skeleton, 0.1, Order::P2)?;
    let projector = DiProjector::new(&mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = SkeletonField::from_dofs(&mesh, DVector::from_fn(mesh.n_dofs(), |_, _| rng.random_range(-1.0..1.0)));
    let (ui, ue) = projector.project(&u)?;
    println!("dofs {}", mesh.n_dofs());
    println!("|U|_K = {:.6}, |U_I|_K = {:.6}, |U_E|_K = {:.6}", k_norm(&u), k_norm(&ui), k_norm(&ue));
    println!("K(U_I, U_E) = {:.2e}", bilinear(projector.gram(), ui.dofs(), ue.dofs()));
    println!("tangential strain of U_I = {:.2e}", extensional_norm(&ui));
    println!("tangential strain of U_E = {:.6}", extensional_norm(&ue));
    Ok(())
}
