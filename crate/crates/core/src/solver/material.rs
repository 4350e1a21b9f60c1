use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic homogeneous material given by its Lamé coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Lame", into = "Lame")]
pub struct Material {
    lambda: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct Lame {
    lambda: f64,
    mu: f64,
}

impl TryFrom<Lame> for Material {
    type Error = Error;
    fn try_from(l: Lame) -> Result<Self> {
        Material::new(l.lambda, l.mu)
    }
}

impl From<Material> for Lame {
    fn from(m: Material) -> Self {
        Lame {
            lambda: m.lambda,
            mu: m.mu,
        }
    }
}

impl Material {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::OutOfRange {
                what: "lambda",
                value: lambda,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::OutOfRange {
                what: "mu",
                value: mu,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Young modulus `μ(3λ+2μ)/(λ+μ)`.
    pub fn young(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }

    /// Elasticity tensor `λ δ_lj δ_kh + μ (δ_lk δ_jh + δ_lh δ_jk)`.
    pub fn tensor(&self, l: usize, j: usize, k: usize, h: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        self.lambda * d(l, j) * d(k, h) + self.mu * (d(l, k) * d(j, h) + d(l, h) * d(j, k))
    }

    /// `σ = λ tr(e) I + 2μ e` for a symmetric strain.
    pub fn stress(&self, strain: &nalgebra::Matrix3<f64>) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::identity() * (self.lambda * strain.trace()) + strain * (2.0 * self.mu)
    }
}
