//! Skeleton geometry: arclength-parametrized arcs with Frenet frames, knots,
//! clamped ends, junction extents and the admissible thickness bound.

mod arc;
mod curve;
mod io;
mod skeleton;

pub use arc::{ArcGeometry, Frame, C_MIN, TOL_ARCLEN, TOL_FRAME};
pub use curve::{CurveSpec, Vec3};
pub use io::{ArcSpec, KnotSpec, SkeletonSpec};
pub use skeleton::{
    Check, ClampedEnd, End, Incidence, JunctionInterval, Knot, KnotRho, Skeleton,
    ValidationReport, TOL_KNOT, TOL_TANGENCY,
};
