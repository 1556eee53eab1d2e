//! Small estimators shared by the Monte Carlo drivers.

use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with a normal-approximation 95% interval clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub mean: f64,
    pub half_width: f64,
    pub samples: usize,
}

impl Proportion {
    /// From per-replicate values in `[0, 1]`.
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
        for v in values {
            n += 1;
            sum += v;
            sum_sq += v * v;
        }
        if n == 0 {
            return Proportion { mean: 0.0, half_width: 0.0, samples: 0 };
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        Proportion { mean, half_width: Z95 * (var / n as f64).sqrt(), samples: n }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        Self::from_values(flags.into_iter().map(|b| if b { 1.0 } else { 0.0 }))
    }

    pub fn lower(&self) -> f64 {
        (self.mean - self.half_width).clamp(0.0, 1.0)
    }

    pub fn upper(&self) -> f64 {
        (self.mean + self.half_width).clamp(0.0, 1.0)
    }

    pub fn overlaps(&self, other: &Proportion) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Coefficient of determination of the least-squares line.
pub fn r_squared(points: &[(f64, f64)]) -> Option<f64> {
    let slope = least_squares_slope(points)?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if ss_tot == 0.0 {
        return Some(1.0);
    }
    let ss_res: f64 = points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Some(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_proportions_have_zero_width() {
        let p = Proportion::from_flags([true; 10]);
        assert_eq!(p.mean, 1.0);
        assert_eq!(p.half_width, 0.0);
        assert_eq!((p.lower(), p.upper()), (1.0, 1.0));
    }

    #[test]
    fn half_width_matches_bernoulli_formula() {
        let p = Proportion::from_flags((0..100).map(|i| i < 30));
        assert!((p.mean - 0.3).abs() < 1e-15);
        assert!((p.half_width - Z95 * (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn slope_of_exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        assert!((least_squares_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!((r_squared(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..1]), None);
    }
}
