//! Zero-temperature random-field Ising model on `Λ(L)`.
//!
//! Hamiltonian, standard convention:
//! `H(σ) = -J Σ_{u~v} σ_u σ_v - Σ_v (η + ε h_v) σ_v`, with the spins outside
//! the box frozen to the boundary value. The lower-bound convention flips the
//! sign of the random term: `... + ε Σ_v h_v σ_v` (and keeps `-η Σ σ_v`).

mod energy;
mod estimate;
mod field;
mod flow;
mod ground;
mod spins;

pub use energy::{energy, flip_energy, single_flip_energy};
pub use estimate::{
    estimate_order_parameter, estimate_zeta2, origin_gaps, CorrelationLengthEstimate,
    OrderParameterEstimate,
};
pub use field::{sample_field, FieldDistribution, RandomField};
pub use ground::{exhaustive_ground_energy, ground_state, ground_state_pair, EXHAUSTIVE_MAX_SITES};
pub use spins::{Boundary, SpinConfiguration};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfimError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("unknown field distribution `{0}` (expected gaussian, rademacher or uniform-symmetric)")]
    UnknownDistribution(String),
    #[error("box mismatch: configuration has L = {config}, field has L = {field}")]
    BoxMismatch { config: u32, field: u32 },
    #[error("set is not contained in the box Λ({0})")]
    SetOutsideBox(u32),
    #[error("spin values must be ±1")]
    InvalidSpin,
    #[error("{0} must be at least 1")]
    EmptyRun(&'static str),
    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
}

/// Which sign the random field term carries in the Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldConvention {
    /// `-(η + ε h_v) σ_v`.
    #[default]
    Standard,
    /// `-η σ_v + ε h_v σ_v`, used by the coarse-graining experiments with `η = 0`.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Coupling `J > 0`.
    pub coupling: f64,
    /// Disorder intensity `ε >= 0`.
    pub disorder: f64,
    /// Homogeneous field `η`.
    #[serde(default)]
    pub field: f64,
    #[serde(default)]
    pub convention: FieldConvention,
}

impl ModelParams {
    pub fn new(coupling: f64, disorder: f64, field: f64) -> Result<Self, RfimError> {
        let p = ModelParams { coupling, disorder, field, convention: FieldConvention::Standard };
        p.validate()?;
        Ok(p)
    }

    /// `η = 0` with the lower-bound sign convention.
    pub fn lower_bound(coupling: f64, disorder: f64) -> Result<Self, RfimError> {
        let p = ModelParams { coupling, disorder, field: 0.0, convention: FieldConvention::LowerBound };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RfimError> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(RfimError::InvalidParams(format!("coupling must be positive, got {}", self.coupling)));
        }
        if !(self.disorder.is_finite() && self.disorder >= 0.0) {
            return Err(RfimError::InvalidParams(format!(
                "disorder must be nonnegative, got {}",
                self.disorder
            )));
        }
        if !self.field.is_finite() {
            return Err(RfimError::InvalidParams("homogeneous field must be finite".into()));
        }
        Ok(())
    }

    /// Coefficient `b_v` such that the single-site term reads `-b_v σ_v`.
    pub fn site_field(&self, h: f64) -> f64 {
        match self.convention {
            FieldConvention::Standard => self.field + self.disorder * h,
            FieldConvention::LowerBound => self.field - self.disorder * h,
        }
    }
}
