use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ground_state_pair, sample_field, FieldDistribution, ModelParams, RfimError};
use crate::lattice::Site;
use crate::rng::replicate_seed;
use crate::stats::{least_squares_slope, Proportion};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterEstimate {
    pub half_side: u32,
    pub mean: f64,
    pub samples: usize,
    pub half_width: f64,
    pub seed: u64,
}

impl OrderParameterEstimate {
    pub fn interval(&self) -> Proportion {
        Proportion { mean: self.mean, half_width: self.half_width, samples: self.samples }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLengthEstimate {
    pub threshold: f64,
    /// Least probed `L` with `m̂(L) < threshold`.
    pub zeta2: Option<u32>,
    pub schedule: Vec<u32>,
    pub estimates: Vec<OrderParameterEstimate>,
    /// Least-squares slope of `ln m̂(L)` against `L` over the points with `m̂ > 0`.
    pub decay_slope: Option<f64>,
}

/// `(σ⁺_0 - σ⁻_0) / 2` for replicates `0..n`. Replicate `r` uses the field seed
/// `replicate_seed(seed, r)` whatever `L` is, so runs at different sizes share
/// their disorder on common sites.
pub fn origin_gaps(
    half_side: u32,
    p: &ModelParams,
    distribution: FieldDistribution,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, RfimError> {
    p.validate()?;
    if n == 0 {
        return Err(RfimError::EmptyRun("sample count"));
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|r| {
            let h = sample_field(half_side, distribution, replicate_seed(seed, r));
            let (plus, minus) = ground_state_pair(&h, p);
            f64::from(plus.spin(Site::ORIGIN) - minus.spin(Site::ORIGIN)) / 2.0
        })
        .collect())
}

pub fn estimate_order_parameter(
    half_side: u32,
    p: &ModelParams,
    distribution: FieldDistribution,
    n: usize,
    seed: u64,
) -> Result<OrderParameterEstimate, RfimError> {
    let gaps = origin_gaps(half_side, p, distribution, n, seed)?;
    let prop = Proportion::from_values(gaps);
    Ok(OrderParameterEstimate {
        half_side,
        mean: prop.mean,
        samples: prop.samples,
        half_width: prop.half_width,
        seed,
    })
}

pub fn estimate_zeta2(
    p: &ModelParams,
    distribution: FieldDistribution,
    threshold: f64,
    schedule: &[u32],
    n: usize,
    seed: u64,
) -> Result<CorrelationLengthEstimate, RfimError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(RfimError::InvalidThreshold(threshold));
    }
    if schedule.is_empty() {
        return Err(RfimError::EmptyRun("schedule length"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RfimError::InvalidParams("schedule must be strictly increasing".into()));
    }
    let estimates = schedule
        .iter()
        .map(|&l| estimate_order_parameter(l, p, distribution, n, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let zeta2 = estimates.iter().find(|e| e.mean < threshold).map(|e| e.half_side);
    let points: Vec<(f64, f64)> =
        estimates.iter().filter(|e| e.mean > 0.0).map(|e| (f64::from(e.half_side), e.mean.ln())).collect();
    Ok(CorrelationLengthEstimate {
        threshold,
        zeta2,
        schedule: schedule.to_vec(),
        estimates,
        decay_slope: least_squares_slope(&points),
    })
}
