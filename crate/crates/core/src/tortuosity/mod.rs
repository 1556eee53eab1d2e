//! Curves, truncated Riesz capacity, cylinder crossings and straight runs.

mod capacity;
mod curve;
mod cylinder;
mod runs;
mod scale;

pub use capacity::{
    capacity, capacity_with, covering_number, covering_report, energy_of, greedy_cover, grid_capacity, kernel,
    random_weights, CapacityOptions, CapacityResult, CoveringReport, CAPACITY_TOLERANCE, MAX_CAPACITY_POINTS,
};
pub use curve::{diameter_of, CurveSystem, PolygonalCurve};
pub use cylinder::{cylinder_crossed, Cylinder, GEOMETRY_TOLERANCE};
pub use runs::{
    admissible_levels, detect_straight_runs, detect_straight_runs_exhaustive, k0_tail, run_radius, sparsity_k0,
    verify_chain, SparsityResult, StraightRun,
};
pub use scale::{
    capacity_lower_bound, choose_scale_params, choose_scale_params_with, log_capacity_lower_bound,
    verify_scale_params, ScaleCheck, ScaleConstants, ScaleParams, KAPPA, PRECISION_DIGITS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TortuosityError {
    #[error("a curve needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("points must share one dimension of at least 2")]
    DimensionMismatch,
    #[error("step {index}: distance {found} differs from the step {expected}")]
    StepMismatch { index: usize, found: f64, expected: f64 },
    #[error("curve leaves the system window")]
    OutsideWindow,
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scale {scale} is below the curve step {step}")]
    ScaleBelowResolution { scale: f64, step: f64 },
    #[error("parameter domain violation: {0}")]
    Domain(String),
}

/// Curve points as slices, the form the capacity routines take.
pub fn curve_points(c: &PolygonalCurve) -> Vec<&[f64]> {
    c.points().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TStatistic {
    Value { value: f64, curve: usize, qualifying: usize },
    /// No curve has diameter at least `r`.
    Vacuous,
}

/// `min Cap_{s;δ}(C)` over curves of the system with diameter at least `r`.
pub fn t_statistic(system: &CurveSystem, s: f64, r: f64, delta: f64) -> Result<TStatistic, TortuosityError> {
    let mut best: Option<(f64, usize)> = None;
    let mut qualifying = 0;
    for (i, c) in system.curves.iter().enumerate() {
        if c.diameter() < r {
            continue;
        }
        qualifying += 1;
        let v = capacity(&curve_points(c), s, delta)?.value;
        if best.is_none_or(|b| v < b.0) {
            best = Some((v, i));
        }
    }
    Ok(match best {
        Some((value, curve)) => TStatistic::Value { value, curve, qualifying },
        None => TStatistic::Vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(x0: f64, n: usize, step: f64) -> PolygonalCurve {
        let pts: Vec<Vec<f64>> = (0..=n).map(|i| vec![x0 + i as f64 * step, 0.0]).collect();
        PolygonalCurve::new(&pts, step).unwrap()
    }

    fn window() -> (Vec<f64>, Vec<f64>) {
        (vec![-10.0, -10.0], vec![10.0, 10.0])
    }

    #[test]
    fn t_statistic_cases() {
        let long = segment(0.0, 16, 0.125);
        let short = segment(0.0, 2, 0.125);
        let sys = CurveSystem::new(vec![long.clone(), short.clone()], 0.125, window()).unwrap();
        let t = t_statistic(&sys, 1.2, 1.0, 0.125).unwrap();
        let direct = capacity(&curve_points(&long), 1.2, 0.125).unwrap().value;
        assert_eq!(t, TStatistic::Value { value: direct, curve: 0, qualifying: 1 });

        let small = CurveSystem::new(vec![short], 0.125, window()).unwrap();
        assert_eq!(t_statistic(&small, 1.2, 1.0, 0.125).unwrap(), TStatistic::Vacuous);
    }

    #[test]
    fn adding_curves_never_raises_t() {
        let a = segment(0.0, 16, 0.125);
        let b = segment(-3.0, 10, 0.125);
        let one = CurveSystem::new(vec![a.clone()], 0.125, window()).unwrap();
        let two = CurveSystem::new(vec![a, b], 0.125, window()).unwrap();
        let value = |t: TStatistic| match t {
            TStatistic::Value { value, .. } => value,
            TStatistic::Vacuous => f64::INFINITY,
        };
        assert!(value(t_statistic(&two, 1.1, 1.0, 0.125).unwrap()) <= value(t_statistic(&one, 1.1, 1.0, 0.125).unwrap()));
    }
}
