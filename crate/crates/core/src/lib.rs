//! Limit one-dimensional models for elastic structures made of thin curved rods.

pub mod cli;
pub mod decomposition;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod loads;
pub mod postprocess;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
