//! Scaling-factor selection and the sparse-runs capacity bound.
//!
//! For H2 closeness `ε`, aspect `σ` and dimension `d`, `γ₀` is the smallest
//! scaling factor past the peak of `f(γ) = 4d ln γ + K₁ - K₀ ε √γ + ln 8`
//! with `f(γ₀) = 0`, floored at `max(4d, σ²)`; every `γ > γ₀` then satisfies
//! `γ^{4d} e^{K₁ - K₀ ε √γ} < 1/8`. The chosen factor is `γ = m + 1/4` with
//! `m = ⌈γ₀⌉`, and `s` solves `γ^s = m (1 + 1/m)^{3/8}`.
//!
//! `γ` is of order `10^{10}` to `10^{14}` for `ε` between `10^{-1}` and
//! `10^{-3}`, so `s - 1` is far below `f64` resolution around `1`. `s` is kept
//! as a decimal string at [`PRECISION_DIGITS`] digits, and the gap
//! `ln β - s ln γ = (1/8) ln(1 + 1/m)` is stored separately.

use std::str::FromStr;

use dashu_float::DBig;
use serde::{Deserialize, Serialize};

use super::TortuosityError;

pub const PRECISION_DIGITS: usize = 80;

/// Documented constant in `s - 1 >= κ ε² / ln(1/ε)³`. Chosen below the value
/// the construction attains across `ε ∈ [10^{-3}, 10^{-1})` with the default
/// surrogate constants.
pub const KAPPA: f64 = 1e-9;

/// Surrogate constants for the raw inequality on `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstants {
    /// `K₀`; `None` means `1 / (40 σ)`.
    pub k0: Option<f64>,
    /// Per-step cylinder-position count `K_d`; `None` means `10^d`.
    pub k_d: Option<f64>,
    /// Slack added to `ln K_d` to form `K₁`.
    pub slack: f64,
}

impl Default for ScaleConstants {
    fn default() -> Self {
        ScaleConstants { k0: None, k_d: None, slack: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub eps_h2: f64,
    pub sigma: f64,
    pub d: u32,
    pub k0_const: f64,
    pub k1_const: f64,
    pub gamma0: f64,
    /// `K` in `γ₀ = K ε^{-2} ln²ε`.
    pub k_const: f64,
    pub m: u64,
    pub gamma: f64,
    pub beta: f64,
    /// `s` rounded to `f64`.
    pub s: f64,
    /// `s` at full precision.
    pub s_decimal: String,
    /// `s - 1`, accurate to `f64` relative precision.
    pub s_minus_one: f64,
    /// `ln β - s ln γ > 0`.
    pub log_gap: f64,
    /// `α = s - 1`.
    pub alpha: f64,
}

fn hp(x: f64) -> DBig {
    // Exact decimal expansion of the binary value, then rounded to the working precision.
    DBig::from_str(&format!("{x:e}")).expect("finite").with_precision(PRECISION_DIGITS).value()
}

fn hp_int(m: u64) -> DBig {
    DBig::from_str(&m.to_string()).expect("integer").with_precision(PRECISION_DIGITS).value()
}

fn to_f64(x: &DBig) -> f64 {
    x.to_f64().value()
}

/// `γ₀` by bisection on `ln γ` to the right of the peak of `f`.
fn gamma0(eps: f64, d: f64, k0: f64, k1: f64) -> f64 {
    let f = |lg: f64| 4.0 * d * lg + k1 - k0 * eps * (0.5 * lg).exp() + 8f64.ln();
    // f'(γ) = 0 at √γ = 8d / (K₀ ε).
    let peak = 2.0 * (8.0 * d / (k0 * eps)).ln();
    let mut lo = peak;
    let mut hi = peak + 1.0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi += 1.0;
    }
    if f(lo) < 0.0 {
        return lo.exp();
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

pub fn choose_scale_params(eps_h2: f64, sigma: f64, d: u32) -> Result<ScaleParams, TortuosityError> {
    choose_scale_params_with(eps_h2, sigma, d, &ScaleConstants::default())
}

pub fn choose_scale_params_with(
    eps_h2: f64,
    sigma: f64,
    d: u32,
    constants: &ScaleConstants,
) -> Result<ScaleParams, TortuosityError> {
    if !(eps_h2 > 0.0 && eps_h2 < 0.1) {
        return Err(TortuosityError::Domain(format!("H2 closeness must lie in (0, 1/10), got {eps_h2}")));
    }
    if !(sigma.is_finite() && sigma >= 1.0) {
        return Err(TortuosityError::Domain(format!("aspect ratio must be at least 1, got {sigma}")));
    }
    if d < 2 {
        return Err(TortuosityError::Domain(format!("dimension must be at least 2, got {d}")));
    }
    let df = f64::from(d);
    let k0 = constants.k0.unwrap_or(1.0 / (40.0 * sigma));
    let k_d = constants.k_d.unwrap_or(10f64.powi(d as i32));
    let k1 = k_d.ln() + constants.slack;
    let g0 = gamma0(eps_h2, df, k0, k1).max(4.0 * df).max(sigma * sigma);
    let m_f = g0.ceil();
    if m_f >= 2f64.powi(52) {
        return Err(TortuosityError::Domain(format!("scaling factor {g0:e} exceeds exact integer range")));
    }
    let m = m_f as u64;
    let gamma = m_f + 0.25;
    let beta = (m_f * (m_f + 1.0)).sqrt();

    let mh = hp_int(m);
    let quarter = DBig::from_str("0.25").unwrap().with_precision(PRECISION_DIGITS).value();
    let gh = &mh + &quarter;
    let inv_m = DBig::ONE.with_precision(PRECISION_DIGITS).value() / &mh;
    let l1p = inv_m.ln_1p();
    let three_eighths = DBig::from_str("0.375").unwrap().with_precision(PRECISION_DIGITS).value();
    let ln_target = mh.ln() + &three_eighths * &l1p;
    let ln_gamma = gh.ln();
    let s = &ln_target / &ln_gamma;
    let s_minus_one = &s - DBig::ONE;
    let log_gap = to_f64(&(l1p / hp_int(8)));

    Ok(ScaleParams {
        eps_h2,
        sigma,
        d,
        k0_const: k0,
        k1_const: k1,
        gamma0: g0,
        k_const: g0 * eps_h2 * eps_h2 / eps_h2.ln().powi(2),
        m,
        gamma,
        beta,
        s: to_f64(&s),
        s_decimal: s.to_string(),
        s_minus_one: to_f64(&s_minus_one),
        log_gap,
        alpha: to_f64(&s_minus_one),
    })
}

/// Re-check of every structural property of a [`ScaleParams`], evaluated
/// independently of its construction (powers rather than logarithms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub gamma_minus_quarter_integral: bool,
    pub gamma_in_range: bool,
    pub m_matches: bool,
    pub beta_matches: bool,
    /// `|γ^s - m (1 + 1/m)^{3/8}|` at full precision.
    pub power_identity_error: f64,
    pub gamma_s_below_beta: bool,
    pub s_above_one: bool,
    /// `(s - 1) / (ε² / ln(1/ε)³)`.
    pub alpha_ratio: f64,
    pub alpha_bound_holds: bool,
}

impl ScaleCheck {
    pub fn all_hold(&self, tolerance: f64) -> bool {
        self.gamma_minus_quarter_integral
            && self.gamma_in_range
            && self.m_matches
            && self.beta_matches
            && self.power_identity_error <= tolerance
            && self.gamma_s_below_beta
            && self.s_above_one
            && self.alpha_bound_holds
    }
}

pub fn verify_scale_params(p: &ScaleParams) -> Result<ScaleCheck, TortuosityError> {
    let s = DBig::from_str(&p.s_decimal)
        .map_err(|e| TortuosityError::Domain(format!("unreadable exponent: {e:?}")))?
        .with_precision(PRECISION_DIGITS)
        .value();
    let mh = hp_int(p.m);
    let gh = hp(p.gamma);
    let one = DBig::ONE.with_precision(PRECISION_DIGITS).value();
    let gamma_s = gh.powf(&s);
    let target = &mh * (&one + &one / &mh).powf(&DBig::from_str("0.375").unwrap().with_precision(PRECISION_DIGITS).value());
    let beta = (&mh * (&mh + &one)).sqrt();
    let err = to_f64(&(&gamma_s - &target)).abs();
    let eps = p.eps_h2;
    let alpha_scale = eps * eps / (1.0 / eps).ln().powi(3);
    let s_minus_one = to_f64(&(&s - &one));
    Ok(ScaleCheck {
        gamma_minus_quarter_integral: (p.gamma - 0.25).fract() == 0.0,
        gamma_in_range: p.gamma > p.gamma0 && p.gamma < 2.0 * p.gamma0,
        m_matches: p.m as f64 == p.gamma - 0.25 && p.m as f64 == p.gamma.floor(),
        beta_matches: (to_f64(&beta) - p.beta).abs() <= 1e-15 * p.beta,
        power_identity_error: err,
        gamma_s_below_beta: gamma_s < beta,
        s_above_one: s > one,
        alpha_ratio: s_minus_one / alpha_scale,
        alpha_bound_holds: s_minus_one >= KAPPA * alpha_scale,
    })
}

/// Lower bound on `Cap_{s;ℓ}` for a curve whose straight runs are
/// `(γ, k₀)`-sparse down to `ℓ`:
/// `((γ/m - 1) diam)^s (γ^{s k₀} + β / (1 - γ^s/β))^{-1}`, evaluated in logs.
pub fn capacity_lower_bound(diam: f64, p: &ScaleParams, k0: u32) -> Result<f64, TortuosityError> {
    Ok(log_capacity_lower_bound(diam, p, k0)?.exp())
}

pub fn log_capacity_lower_bound(diam: f64, p: &ScaleParams, k0: u32) -> Result<f64, TortuosityError> {
    let m = p.m as f64;
    if !(m >= p.gamma / 2.0 && m <= p.gamma) {
        return Err(TortuosityError::Domain(format!("m = {m} is not in [γ/2, γ] for γ = {}", p.gamma)));
    }
    if !(p.log_gap > 0.0) {
        return Err(TortuosityError::Domain("γ^s must be below β".into()));
    }
    if !(diam > 0.0) {
        return Err(TortuosityError::Domain(format!("diameter must be positive, got {diam}")));
    }
    let ln_g = p.gamma.ln();
    // 1 - γ^s/β = -expm1(-gap)
    let ln_tail = p.beta.ln() - (-(-p.log_gap).exp_m1()).ln();
    let ln_head = p.s * f64::from(k0) * ln_g;
    let (hi, lo) = if ln_head > ln_tail { (ln_head, ln_tail) } else { (ln_tail, ln_head) };
    let ln_denominator = hi + (lo - hi).exp().ln_1p();
    Ok(p.s * (((p.gamma - m) / m).ln() + diam.ln()) - ln_denominator)
}
