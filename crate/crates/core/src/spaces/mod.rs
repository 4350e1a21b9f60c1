//! Discrete H¹ fields on the skeleton, the tangential-derivative constraint,
//! the inextensional/extensional splitting and constrained kinematic pairs.

mod field;
mod mesh;
mod operators;
mod pair;

pub use field::SkeletonField;
pub use mesh::{Element, Order, QuadPoint, Side, SkeletonMesh};
pub use operators::{
    constraint_weights, dense_extensional_basis, extensional_form, extensional_norm,
    gram_matrix, gram_matrix_semidefinite, k_norm, norm_equivalence, project_di,
    tangential_constraint, write_triplets, DiProjector,
};
pub use pair::{pair_constraint_operator, reduction_identity_defects, KinematicPair};
