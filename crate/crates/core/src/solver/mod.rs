//! The two limit problems: extensional displacements, and inextensional
//! displacements coupled with the rotation field through `dV/ds = ℛ × T`.

mod coercivity;
mod config;
mod extensional;
mod inextensional;
mod material;

use std::sync::Arc;

use serde::Serialize;

pub use coercivity::{coercivity_check, mass_matrix, CoercivityReport};
pub use config::{ElementKind, ExtensionalSolver, SolverConfig};
pub use extensional::{solve_extensional, solve_with as solve_extensional_with, ExtensionalDiagnostics};
pub use inextensional::{
    rotation_stiffness, solve_inextensional, solve_system as solve_inextensional_system,
    unclamped_arcs, InextensionalDiagnostics, InextensionalSystem,
};
pub use material::Material;

use crate::error::Result;
use crate::geometry::{Skeleton, Vec3};
use crate::loads::{self, LoadCase};
use crate::spaces::{KinematicPair, Order, SkeletonField, SkeletonMesh};

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub extensional: ExtensionalDiagnostics,
    pub inextensional: InextensionalDiagnostics,
}

impl Diagnostics {
    /// Whether every residual is within the configured tolerances.
    pub fn within(&self, config: &SolverConfig) -> bool {
        self.failures(config).is_empty()
    }

    /// Descriptions of the residuals that exceed their tolerance.
    pub fn failures(&self, config: &SolverConfig) -> Vec<String> {
        let e = &self.extensional;
        let i = &self.inextensional;
        [
            ("extensional Galerkin residual", e.galerkin_residual, config.tol_residual),
            ("orthogonality defect", e.orthogonality_defect, config.tol_orth),
            ("saddle-point residual", i.saddle_residual, config.tol_residual),
            ("collocation residual", i.collocation_residual, config.tol_constraint),
            ("knot rigidity defect", i.knot_rigidity_defect, config.tol_constraint),
        ]
        .into_iter()
        .filter(|(_, v, tol)| !(v <= tol))
        .map(|(name, v, tol)| format!("{name} {v:.3e} exceeds {tol:.1e}"))
        .collect()
    }
}

/// Both limit fields on one mesh.
#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub material: Material,
    /// The load case after the orthogonality check or projection.
    pub loads: LoadCase,
    pub u_e: SkeletonField,
    pub pair: KinematicPair,
    pub diagnostics: Diagnostics,
}

impl LimitSolution {
    pub fn mesh(&self) -> &Arc<SkeletonMesh> {
        self.u_e.mesh()
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        self.mesh().skeleton()
    }

    pub fn u_i(&self) -> &SkeletonField {
        &self.pair.v
    }

    pub fn rotation(&self) -> &SkeletonField {
        &self.pair.a
    }

    /// Limit displacement `U_E + U_I`.
    pub fn displacement(&self, arc: usize, s: f64) -> Vec3 {
        self.u_e.value(arc, s) + self.pair.v.value(arc, s)
    }

    pub fn theta(&self, arc: usize, s: f64) -> Result<f64> {
        self.pair.theta(arc, s)
    }
}

/// Mesh the skeleton, prepare the loads according to their mode and solve
/// both limit problems.
pub fn solve(
    skeleton: Arc<Skeleton>,
    material: &Material,
    loads: &LoadCase,
    config: &SolverConfig,
) -> Result<LimitSolution> {
    config.validate()?;
    let mesh = SkeletonMesh::build(skeleton, config.h, Order::P2)?;
    solve_on(&mesh, material, loads, config)
}

pub fn solve_on(
    mesh: &Arc<SkeletonMesh>,
    material: &Material,
    loads: &LoadCase,
    config: &SolverConfig,
) -> Result<LimitSolution> {
    let prepared = loads::prepare(loads, mesh, config.tol_orth, config.load_quadrature)?;
    let (u_e, extensional) = solve_extensional(mesh, material, &prepared, config)?;
    let (pair, inextensional) = solve_inextensional(mesh, material, &prepared, config)?;
    Ok(LimitSolution {
        material: *material,
        loads: prepared,
        u_e,
        pair,
        diagnostics: Diagnostics {
            extensional,
            inextensional,
        },
    })
}
