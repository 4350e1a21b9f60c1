use thiserror::Error;

/// Errors raised by the geometry, discretization, solver and decomposition layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arc {arc}: arclength reparametrization did not converge ({detail})")]
    NonUnitSpeedUnfixable { arc: usize, detail: String },

    #[error("arc {arc}: Frenet frame undefined at s = {s} (curvature below threshold and no frame override)")]
    FrameUndefined { arc: usize, s: f64 },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("thickness {delta} exceeds the admissible bound delta0 = {delta0}")]
    DeltaTooLarge { delta: f64, delta0: f64 },

    #[error("no clamped ends: the gradient inner product is only a semi-norm")]
    NotClamped,

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("extensional right-hand side used before its orthogonality to inextensional fields was checked or enforced")]
    OrthogonalityNotEnforced,

    #[error("extensional loads act on inextensional displacements (relative defect {defect:.3e} > {tol:.1e})")]
    OrthogonalityViolated { defect: f64, tol: f64 },

    #[error("semidefinite system is inconsistent (relative residual {residual:.3e}); extensional loads are not orthogonal to the kernel")]
    SingularInconsistent { residual: f64 },

    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("saddle-point system is singular: {cause}")]
    SaddleSingular { cause: String },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("arc {arc}: blending zones of knots {first} and {second} overlap; use a smaller thickness")]
    OverlappingJunctions {
        arc: usize,
        first: usize,
        second: usize,
    },

    #[error("knot {knot} is not a node of the mesh on arc {arc}")]
    KnotNotMeshNode { knot: usize, arc: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
