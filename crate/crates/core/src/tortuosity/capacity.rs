use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::curve::dist;
use super::TortuosityError;
use crate::rng::stream_rng;

/// Dense kernels above this size are built on an evenly strided subsample.
/// A subset has smaller capacity, so lower-bound checks stay conservative.
pub const MAX_CAPACITY_POINTS: usize = 2048;

/// Stop when the largest first-order violation falls below this fraction of the energy.
pub const CAPACITY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_points: usize,
    pub tolerance: f64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { restarts: 3, seed: 0x5eed, max_points: MAX_CAPACITY_POINTS, tolerance: CAPACITY_TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// `Cap_{s;ℓ}`.
    pub value: f64,
    /// Optimal weights over the points actually used.
    pub weights: Vec<f64>,
    /// Indices into the input of the points that carry `weights`.
    pub support: Vec<usize>,
    pub s: f64,
    pub ell: f64,
    /// Final first-order gap `max_{μ_i>0} g_i - min_j g_j`, relative to the energy.
    pub residual: f64,
    pub subsampled: bool,
}

impl CapacityResult {
    pub fn energy(&self) -> f64 {
        1.0 / self.value
    }
}

pub fn kernel(a: &[f64], b: &[f64], s: f64, ell: f64) -> f64 {
    dist(a, b).max(ell).powf(-s)
}

fn check(points: &[&[f64]], s: f64, ell: f64) -> Result<(), TortuosityError> {
    if points.is_empty() {
        return Err(TortuosityError::EmptyPointSet);
    }
    if !(s.is_finite() && s > 0.0 && ell.is_finite() && ell > 0.0) {
        return Err(TortuosityError::InvalidParameter(format!("need s > 0 and ℓ > 0, got s = {s}, ℓ = {ell}")));
    }
    Ok(())
}

/// `μᵀKμ` for weights over the given points.
pub fn energy_of(points: &[&[f64]], weights: &[f64], s: f64, ell: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..points.len() {
        for j in 0..points.len() {
            e += weights[i] * weights[j] * kernel(points[i], points[j], s, ell);
        }
    }
    e
}

pub fn capacity(points: &[&[f64]], s: f64, ell: f64) -> Result<CapacityResult, TortuosityError> {
    capacity_with(points, s, ell, &CapacityOptions::default())
}

/// Minimizes `μᵀKμ` over the probability simplex by pairwise exchange with an
/// exact line search along `e_j - e_i`, from the uniform start and
/// `opts.restarts` random starts, and returns the reciprocal of the best energy.
pub fn capacity_with(
    points: &[&[f64]],
    s: f64,
    ell: f64,
    opts: &CapacityOptions,
) -> Result<CapacityResult, TortuosityError> {
    check(points, s, ell)?;
    let stride = points.len().div_ceil(opts.max_points.max(1));
    let support: Vec<usize> = (0..points.len()).step_by(stride).collect();
    let n = support.len();
    let mut k = vec![0.0; n * n];
    for a in 0..n {
        for b in a..n {
            let v = kernel(points[support[a]], points[support[b]], s, ell);
            k[a * n + b] = v;
            k[b * n + a] = v;
        }
    }
    let mut rng = stream_rng(opts.seed, n as u64);
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for r in 0..=opts.restarts {
        let start = if r == 0 {
            vec![1.0 / n as f64; n]
        } else {
            random_weights(&mut rng, n)
        };
        let (e, w, gap) = exchange_descent(&k, n, start, opts.tolerance);
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, w, gap));
        }
        // Single points and pairs have nothing left to explore.
        if n <= 2 {
            break;
        }
    }
    let (e, weights, residual) = best.expect("at least one start");
    Ok(CapacityResult { value: 1.0 / e, weights, support, s, ell, residual, subsampled: stride > 1 })
}

fn exchange_descent(k: &[f64], n: usize, mut mu: Vec<f64>, tol: f64) -> (f64, Vec<f64>, f64) {
    let mut g = vec![0.0; n];
    for i in 0..n {
        g[i] = 2.0 * (0..n).map(|j| k[i * n + j] * mu[j]).sum::<f64>();
    }
    let energy = |mu: &[f64], g: &[f64]| 0.5 * mu.iter().zip(g).map(|(m, gi)| m * gi).sum::<f64>();
    let max_iter = 20_000 + 400 * n;
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let (mut hi, mut lo) = (usize::MAX, 0usize);
        for i in 0..n {
            if mu[i] > 0.0 && (hi == usize::MAX || g[i] > g[hi]) {
                hi = i;
            }
            if g[i] < g[lo] {
                lo = i;
            }
        }
        let e = energy(&mu, &g);
        gap = (g[hi] - g[lo]) / (2.0 * e);
        if gap <= tol || hi == lo {
            break;
        }
        let curvature = k[hi * n + hi] + k[lo * n + lo] - 2.0 * k[hi * n + lo];
        let t = if curvature > 0.0 { ((g[hi] - g[lo]) / (2.0 * curvature)).min(mu[hi]) } else { mu[hi] };
        if t <= 0.0 {
            break;
        }
        mu[hi] -= t;
        mu[lo] += t;
        if mu[hi] < 1e-300 {
            mu[hi] = 0.0;
        }
        for i in 0..n {
            g[i] += 2.0 * t * (k[i * n + lo] - k[i * n + hi]);
        }
    }
    // Refresh the energy from scratch to shed accumulated drift.
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            e += mu[i] * mu[j] * k[i * n + j];
        }
    }
    (e, mu, gap)
}

/// Independent oracle: the least energy over the simplex grid of step
/// `1/resolution`, for at most four points. Returns the capacity.
pub fn grid_capacity(points: &[&[f64]], s: f64, ell: f64, resolution: usize) -> Result<f64, TortuosityError> {
    check(points, s, ell)?;
    let n = points.len();
    if n > 4 {
        return Err(TortuosityError::InvalidParameter("grid oracle handles at most 4 points".into()));
    }
    let mut k = [[0.0f64; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            k[i][j] = kernel(points[i], points[j], s, ell);
        }
    }
    let r = resolution;
    let h = 1.0 / r as f64;
    let mut best = f64::INFINITY;
    let e = |w: [f64; 4]| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += w[i] * w[j] * k[i][j];
            }
        }
        acc
    };
    match n {
        1 => best = k[0][0],
        2 => {
            for a in 0..=r {
                let x = a as f64 * h;
                best = best.min(e([x, 1.0 - x, 0.0, 0.0]));
            }
        }
        3 => {
            for a in 0..=r {
                for b in 0..=(r - a) {
                    let (x, y) = (a as f64 * h, b as f64 * h);
                    best = best.min(e([x, y, 1.0 - x - y, 0.0]));
                }
            }
        }
        _ => {
            // Along the innermost coordinate the energy is a quadratic in `z`,
            // so it is evaluated from three coefficients.
            for a in 0..=r {
                for b in 0..=(r - a) {
                    let (x, y) = (a as f64 * h, b as f64 * h);
                    let rest = 1.0 - x - y;
                    // w = (x, y, z, rest - z)
                    let c0 = e([x, y, 0.0, rest]);
                    let lin = 2.0 * (x * (k[0][2] - k[0][3]) + y * (k[1][2] - k[1][3]) + rest * (k[2][3] - k[3][3]));
                    let quad = k[2][2] + k[3][3] - 2.0 * k[2][3];
                    for c in 0..=(r - a - b) {
                        let z = c as f64 * h;
                        best = best.min(c0 + lin * z + quad * z * z);
                    }
                }
            }
        }
    }
    Ok(1.0 / best)
}

/// Greedy cover by groups of diameter at most `max_diameter`: each group is
/// seeded by the first uncovered point and absorbs, in input order, every
/// uncovered point within `max_diameter` of all current members.
pub fn greedy_cover(points: &[&[f64]], max_diameter: f64) -> Vec<Vec<usize>> {
    let mut covered = vec![false; points.len()];
    let mut groups = Vec::new();
    for seed in 0..points.len() {
        if covered[seed] {
            continue;
        }
        covered[seed] = true;
        let mut group = vec![seed];
        for q in seed + 1..points.len() {
            if !covered[q] && group.iter().all(|&m| dist(points[m], points[q]) <= max_diameter) {
                covered[q] = true;
                group.push(q);
            }
        }
        groups.push(group);
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// Greedy upper bound on `N(A, ℓ)`.
    pub count: usize,
    /// `Cap_{s;ℓ}(A) · ℓ^{-s}`, which `N(A, ℓ)` can never be below.
    pub lower_bound: f64,
}

pub fn covering_number(points: &[&[f64]], ell: f64) -> Result<usize, TortuosityError> {
    if points.is_empty() {
        return Err(TortuosityError::EmptyPointSet);
    }
    Ok(greedy_cover(points, ell).len())
}

pub fn covering_report(points: &[&[f64]], s: f64, ell: f64) -> Result<CoveringReport, TortuosityError> {
    let count = covering_number(points, ell)?;
    let cap = capacity(points, s, ell)?;
    Ok(CoveringReport { count, lower_bound: cap.value * ell.powf(-s) })
}

/// Uniform random probability vector, used by tests and experiments.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn refs(p: &[Vec<f64>]) -> Vec<&[f64]> {
        p.iter().map(|v| v.as_slice()).collect()
    }

    #[test]
    fn single_point_capacity_is_ell_to_the_s() {
        let p = vec![vec![0.3, -1.0]];
        let c = capacity(&refs(&p), 1.3, 0.2).unwrap();
        assert!((c.value - 0.2f64.powf(1.3)).abs() < 1e-14);
    }

    #[test]
    fn two_point_closed_form() {
        for (d, s, ell) in [(1.0, 1.0, 0.5), (3.0, 1.5, 0.25), (0.7, 0.5, 0.7)] {
            let p = vec![vec![0.0, 0.0], vec![d, 0.0]];
            let c = capacity(&refs(&p), s, ell).unwrap();
            let expected = 2.0 / (ell.powf(-s) + f64::max(d, ell).powf(-s));
            assert!((c.value - expected).abs() < 1e-9 * expected, "{} vs {}", c.value, expected);
            assert!((grid_capacity(&refs(&p), s, ell, 1000).unwrap() - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn weights_lie_on_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
        let c = capacity(&refs(&p), 1.2, 0.05).unwrap();
        assert!(c.weights.iter().all(|w| *w >= 0.0));
        assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let e = energy_of(&refs(&p), &c.weights, 1.2, 0.05);
        assert!((1.0 / e - c.value).abs() < 1e-9 * c.value);
        assert!(c.residual <= CAPACITY_TOLERANCE);
    }

    #[test]
    fn no_random_measure_beats_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random::<f64>() * 2.0, rng.random()]).collect();
        let c = capacity(&refs(&p), 1.0, 0.1).unwrap();
        for _ in 0..500 {
            let w = random_weights(&mut rng, p.len());
            assert!(energy_of(&refs(&p), &w, 1.0, 0.1) >= c.energy() - 1e-12);
        }
    }

    #[test]
    fn capacity_is_monotone_under_inclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let p: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random(), rng.random()]).collect();
            let big = capacity(&refs(&p), 1.1, 0.05).unwrap().value;
            let small = capacity(&refs(&p[..6]), 1.1, 0.05).unwrap().value;
            assert!(small <= big * (1.0 + 1e-9));
        }
    }

    #[test]
    fn grid_oracle_agrees_on_small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..6 {
            let n = rng.random_range(1..=4);
            let p: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let c = capacity(&refs(&p), 1.0, 0.1).unwrap().value;
            let g = grid_capacity(&refs(&p), 1.0, 0.1, 200).unwrap();
            assert!(g <= c + 1e-9 && c - g < 1e-2, "{c} vs {g}");
        }
    }

    #[test]
    fn covering_edge_cases() {
        let p = vec![vec![0.0, 0.0], vec![0.3, 0.0], vec![0.0, 0.3]];
        assert_eq!(covering_number(&refs(&p), 0.5).unwrap(), 1);
        let far: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 0.0]).collect();
        assert_eq!(covering_number(&refs(&far), 0.9).unwrap(), 7);
        assert!(covering_number(&[], 1.0).is_err());
    }

    #[test]
    fn subsampling_kicks_in_for_large_sets() {
        let p: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 * 0.01, 0.0]).collect();
        let opts = CapacityOptions { max_points: 30, ..Default::default() };
        let c = capacity_with(&refs(&p), 1.0, 0.01, &opts).unwrap();
        assert!(c.subsampled);
        assert_eq!(c.support.len(), 25);
        let full = capacity(&refs(&p), 1.0, 0.01).unwrap();
        assert!(c.value <= full.value);
    }
}
