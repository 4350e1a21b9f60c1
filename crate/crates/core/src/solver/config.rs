use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loads::TOL_ORTH;

/// Finite element pairing; only quadratic displacements with linear
/// rotations are implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    #[default]
    P2P1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionalSolver {
    /// Jacobi-preconditioned CG on the singular consistent system.
    #[default]
    Cg,
    /// Sparse LDLᵀ of the form shifted by a small multiple of the Gram
    /// matrix, with refinement against the unshifted form.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target element size.
    pub h: f64,
    pub element: ElementKind,
    /// Gauss points per sub-interval for load integration.
    pub load_quadrature: usize,
    pub extensional_solver: ExtensionalSolver,
    pub cg_tol: f64,
    /// 0 means ten times the number of unknowns.
    pub cg_max_iter: usize,
    pub saddle_regularization: f64,
    pub saddle_tol: f64,
    pub saddle_max_steps: usize,
    pub tol_orth: f64,
    pub tol_constraint: f64,
    pub tol_residual: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.05,
            element: ElementKind::P2P1,
            load_quadrature: 4,
            extensional_solver: ExtensionalSolver::Cg,
            cg_tol: 1e-13,
            cg_max_iter: 0,
            saddle_regularization: 1e-10,
            saddle_tol: 1e-11,
            saddle_max_steps: 60,
            tol_orth: TOL_ORTH,
            tol_constraint: 1e-8,
            tol_residual: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("h", self.h),
            ("cg_tol", self.cg_tol),
            ("saddle_regularization", self.saddle_regularization),
            ("saddle_tol", self.saddle_tol),
            ("tol_orth", self.tol_orth),
            ("tol_constraint", self.tol_constraint),
            ("tol_residual", self.tol_residual),
        ];
        for (what, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{what} must be positive, got {v}")));
            }
        }
        if !(1..=16).contains(&self.load_quadrature) {
            return Err(Error::InvalidInput(format!(
                "load_quadrature must be in 1..=16, got {}",
                self.load_quadrature
            )));
        }
        Ok(())
    }
}
