//! Chain of the correlation-length bounds as explicit functions of `J/ε`.
//!
//! Values that leave the `f64` range are carried as logarithms (`log_*`) or
//! iterated logarithms (`log_log_*`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("J/ε = {0} is below 1")]
    RatioBelowOne(f64),
    #[error("constant {name} = {value} must be positive and finite")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("κ threshold {0} must lie in (0, 1)")]
    ThresholdOutOfRange(f64),
    #[error("ε_H2 = {0} is not below 1/10")]
    EpsilonOutOfDomain(f64),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
}

/// The unspecified constants, each defaulting to a conventional value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConstants {
    /// `c` in `ρ = 1 - c·exp(-C(J/ε)²)`.
    pub c_rho: f64,
    /// `C` in `ρ = 1 - c·exp(-C(J/ε)²)`.
    pub big_c_rho: f64,
    /// `κ` in `α >= κ ε²/log(1/ε)³`.
    pub kappa_alpha: f64,
    /// `K` in the tail exponent `K / log(1/ε)`.
    pub k_tail: f64,
    /// `C` in `ζ₁ <= C·max(2, J/ε, 1/α, ℓ₁)^{C/α²}`.
    pub c_zeta1: f64,
    /// `C'` in `ℓ₁ = exp(exp(C'(J/ε)²))`.
    pub c_ell1: f64,
    /// `c(δ)` in `ζ₂ >= exp(c(δ)(J/ε)^{2/3})`.
    pub c_delta: f64,
    /// Threshold `κ < 1` on the annulus-crossing probability defining `ℓ₀`.
    pub kappa_threshold: f64,
    /// `c` in the crossing bound `exp(-c·log(ℓ)·α·(ε/J)²)`.
    pub c_crossing: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c_rho: 1.0,
            big_c_rho: 1.0,
            kappa_alpha: 1.0,
            k_tail: 1.0,
            c_zeta1: 1.0,
            c_ell1: 1.0,
            c_delta: 1.0,
            kappa_threshold: 0.5,
            c_crossing: 1.0,
        }
    }
}

impl BoundConstants {
    pub const NAMES: [&'static str; 9] =
        ["c_rho", "big_c_rho", "kappa_alpha", "k_tail", "c_zeta1", "c_ell1", "c_delta", "kappa_threshold", "c_crossing"];

    fn values(&self) -> [f64; 9] {
        [
            self.c_rho,
            self.big_c_rho,
            self.kappa_alpha,
            self.k_tail,
            self.c_zeta1,
            self.c_ell1,
            self.c_delta,
            self.kappa_threshold,
            self.c_crossing,
        ]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), BoundError> {
        let slot = match name {
            "c_rho" => &mut self.c_rho,
            "big_c_rho" => &mut self.big_c_rho,
            "kappa_alpha" => &mut self.kappa_alpha,
            "k_tail" => &mut self.k_tail,
            "c_zeta1" => &mut self.c_zeta1,
            "c_ell1" => &mut self.c_ell1,
            "c_delta" => &mut self.c_delta,
            "kappa_threshold" => &mut self.kappa_threshold,
            "c_crossing" => &mut self.c_crossing,
            other => return Err(BoundError::UnknownConstant(other.to_string())),
        };
        *slot = value;
        Ok(())
    }

    /// Names still at their conventional default values.
    pub fn conventional(&self) -> Vec<String> {
        let d = BoundConstants::default().values();
        Self::NAMES.iter().zip(self.values().iter().zip(d)).filter(|(_, (v, d))| *v == d).map(|(n, _)| n.to_string()).collect()
    }

    fn validate(&self) -> Result<(), BoundError> {
        for (name, v) in Self::NAMES.iter().zip(self.values()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(BoundError::NonPositiveConstant { name, value: v });
            }
        }
        if self.kappa_threshold >= 1.0 {
            return Err(BoundError::ThresholdOutOfRange(self.kappa_threshold));
        }
        Ok(())
    }
}

pub const CONVENTIONAL_LABEL: &str = "conventional, not from the paper";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub jeps: f64,
    pub constants: BoundConstants,
    /// Constants left at their defaults, labelled with [`CONVENTIONAL_LABEL`].
    pub conventional: Vec<String>,
    pub rho: f64,
    pub eps_h2: f64,
    pub log_eps_h2: f64,
    /// `α = κ ε_H2² / log(1/ε_H2)³`; zero once it underflows.
    pub alpha: f64,
    pub log_alpha: f64,
    /// `K / log(1/ε_H2)`.
    pub tail_exponent: f64,
    /// `log ℓ₁ = exp(C'(J/ε)²)`.
    pub log_ell1: f64,
    pub log_log_ell1: f64,
    /// `log ℓ₁ = 2 log(1/κ)(J/ε)² / (c α)`, where the crossing bound meets `κ`.
    pub log_log_ell1_threshold: f64,
    pub log_log_zeta1_upper: f64,
    /// `log ζ₂ >= c(δ)(J/ε)^{2/3}`.
    pub log_zeta2_lower: f64,
    pub zeta2_lower: f64,
}

/// `ln(a + e^b)`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        let la = a.ln();
        la.max(b) + (-(la - b).abs()).exp().ln_1p()
    } else {
        b + (a * (-b).exp()).ln_1p()
    }
}

pub fn evaluate_bound_chain(jeps: f64, constants: &BoundConstants) -> Result<BoundChain, BoundError> {
    if !(jeps >= 1.0 && jeps.is_finite()) {
        return Err(BoundError::RatioBelowOne(jeps));
    }
    constants.validate()?;
    let k = constants;
    let x2 = jeps * jeps;
    let log_eps = k.c_rho.ln() - k.big_c_rho * x2;
    let eps_h2 = log_eps.exp();
    if log_eps >= (0.1f64).ln() {
        return Err(BoundError::EpsilonOutOfDomain(eps_h2));
    }
    let log_inv = -log_eps;
    let log_alpha = k.kappa_alpha.ln() + 2.0 * log_eps - 3.0 * log_inv.ln();
    let log_ell1 = (k.c_ell1 * x2).exp();
    let log_log_ell1 = k.c_ell1 * x2;
    let log_log_ell1_threshold = (2.0 * (1.0 / k.kappa_threshold).ln() * x2 / k.c_crossing).ln() - log_alpha;
    // log max(2, J/ε, 1/α, ℓ₁), as a log.
    let mut log_log_max = (2.0f64).ln().ln().max(log_log_ell1).max((-log_alpha).ln());
    if jeps > 1.0 {
        log_log_max = log_log_max.max(jeps.ln().ln());
    }
    // log ζ₁ = log C + (C/α²)·log max; the second term is exp(·) of:
    let exponent = k.c_zeta1.ln() - 2.0 * log_alpha + log_log_max;
    let log_log_zeta1_upper = ln_add_exp(k.c_zeta1.ln(), exponent);
    let log_zeta2_lower = k.c_delta * jeps.powf(2.0 / 3.0);
    Ok(BoundChain {
        jeps,
        constants: constants.clone(),
        conventional: constants.conventional(),
        rho: 1.0 - eps_h2,
        eps_h2,
        log_eps_h2: log_eps,
        alpha: log_alpha.exp(),
        log_alpha,
        tail_exponent: k.k_tail / log_inv,
        log_ell1,
        log_log_ell1,
        log_log_ell1_threshold,
        log_log_zeta1_upper,
        log_zeta2_lower,
        zeta2_lower: log_zeta2_lower.exp(),
    })
}
