//! Straight runs and their sparsity.
//!
//! A run at scale `L = γ^{-k}` is a crossing of a cylinder of length `L` and
//! radius `9L / (2√γ)`. Candidate axes start at points of the lattice
//! `(L/γ) ℤ^d` and point along integer vectors `v` with `|(L/γ)|v| - L| <= L/(2γ)`,
//! ending at `a + L v/|v|`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::curve::{dist, PolygonalCurve};
use super::cylinder::{cylinder_crossed, Cylinder};
use super::TortuosityError;
use crate::stats::{least_squares_slope, r_squared};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraightRun {
    /// Scale index `k`, the run has length `γ^{-k}`.
    pub level: u32,
    pub cylinder: Cylinder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityResult {
    /// Least `k₀` such that the curve is `(γ, k₀)`-sparse down to `δ`.
    pub k0: u32,
    /// A nested chain of `(k₀ - 1) / 2` runs at scales `<= k₀ - 1`, when `k₀ > 0`.
    pub witness: Option<Vec<StraightRun>>,
    /// Admissible scale indices `1..=K` with `γ^{-K} >= δ`.
    pub levels: Vec<u32>,
    pub runs_per_level: Vec<usize>,
}

pub fn run_radius(gamma: f64, scale: f64) -> f64 {
    9.0 * scale / (2.0 * gamma.sqrt())
}

fn check_gamma(gamma: f64) -> Result<(), TortuosityError> {
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(TortuosityError::InvalidParameter(format!("scaling factor must exceed 1, got {gamma}")));
    }
    Ok(())
}

/// Integer vectors with `|v|` within `1/2` of `γ`, in lexicographic order.
fn directions(gamma: f64, d: usize) -> Vec<Vec<i64>> {
    let reach = (gamma + 1.0).ceil() as i64;
    let mut out = Vec::new();
    let mut v = vec![-reach; d];
    loop {
        let norm = v.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt();
        if (norm - gamma).abs() <= 0.5 {
            out.push(v.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < reach {
                v[i] += 1;
                break;
            }
            v[i] = -reach;
        }
    }
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 > 0.0 { (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0) } else { 0.0 };
    let proj: Vec<f64> = a.iter().zip(&ab).map(|(x, y)| x + t * y).collect();
    dist(p, &proj)
}

fn near_curve(curve: &PolygonalCurve, p: &[f64], r: f64) -> bool {
    curve.segments().any(|(a, b)| point_segment_distance(p, a, b) <= r * (1.0 + 1e-12))
}

/// Lattice points (as integer coordinates) of spacing `h` inside the box
/// spanned by the curve, inflated by `pad`.
fn lattice_points_in_box(curve: &PolygonalCurve, h: f64, pad: f64) -> Vec<Vec<i64>> {
    let d = curve.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in curve.points() {
        for i in 0..d {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let lo: Vec<i64> = lo.iter().map(|x| ((x - pad) / h).floor() as i64).collect();
    let hi: Vec<i64> = hi.iter().map(|x| ((x + pad) / h).ceil() as i64).collect();
    let mut out = Vec::new();
    let mut v = lo.clone();
    loop {
        out.push(v.clone());
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < hi[i] {
                v[i] += 1;
                break;
            }
            v[i] = lo[i];
        }
    }
}

fn scale_of(gamma: f64, level: u32, curve: &PolygonalCurve) -> Result<f64, TortuosityError> {
    check_gamma(gamma)?;
    let scale = gamma.powi(-(level as i32));
    if scale < curve.step() * (1.0 - 1e-12) {
        return Err(TortuosityError::ScaleBelowResolution { scale, step: curve.step() });
    }
    Ok(scale)
}

fn runs_from(curve: &PolygonalCurve, gamma: f64, level: u32, bases: Vec<Vec<i64>>, prune: bool) -> Vec<StraightRun> {
    let scale = gamma.powi(-(level as i32));
    let h = scale / gamma;
    let r = run_radius(gamma, scale);
    let dirs = directions(gamma, curve.dim());
    let mut out = Vec::new();
    for base in bases {
        let a: Vec<f64> = base.iter().map(|&x| x as f64 * h).collect();
        if prune && !near_curve(curve, &a, r) {
            continue;
        }
        for v in &dirs {
            let norm = v.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt();
            let b: Vec<f64> = a.iter().zip(v).map(|(x, vi)| x + scale * *vi as f64 / norm).collect();
            if prune && !near_curve(curve, &b, r) {
                continue;
            }
            let c = Cylinder { a: a.clone(), b, radius: r };
            if cylinder_crossed(curve, &c) {
                out.push(StraightRun { level, cylinder: c });
            }
        }
    }
    out
}

/// Crossed candidate cylinders at scale `γ^{-k}`. Both bases of a crossed
/// cylinder lie within its radius of the curve, which prunes the search.
pub fn detect_straight_runs(curve: &PolygonalCurve, gamma: f64, level: u32) -> Result<Vec<StraightRun>, TortuosityError> {
    let scale = scale_of(gamma, level, curve)?;
    let r = run_radius(gamma, scale);
    let h = scale / gamma;
    let mut bases = BTreeSet::new();
    for (p, q) in curve.segments() {
        let seg = PolygonalCurve::new(&[p.to_vec(), q.to_vec()], dist(p, q)).expect("segment of the curve");
        for z in lattice_points_in_box(&seg, h, r) {
            let a: Vec<f64> = z.iter().map(|&x| x as f64 * h).collect();
            if point_segment_distance(&a, p, q) <= r * (1.0 + 1e-12) {
                bases.insert(z);
            }
        }
    }
    Ok(runs_from(curve, gamma, level, bases.into_iter().collect(), true))
}

/// Oracle for [`detect_straight_runs`]: every candidate axis with base in the
/// curve's bounding box inflated by `L + r + L/γ`, with no pruning.
pub fn detect_straight_runs_exhaustive(
    curve: &PolygonalCurve,
    gamma: f64,
    level: u32,
) -> Result<Vec<StraightRun>, TortuosityError> {
    let scale = scale_of(gamma, level, curve)?;
    let pad = scale + run_radius(gamma, scale) + scale / gamma;
    let bases = lattice_points_in_box(curve, scale / gamma, pad);
    Ok(runs_from(curve, gamma, level, bases, false))
}

/// Admissible scale indices `k >= 1` with `γ^{-k} >= δ`.
pub fn admissible_levels(gamma: f64, delta: f64) -> Vec<u32> {
    let mut out = Vec::new();
    let mut k = 1u32;
    while gamma.powi(-(k as i32)) >= delta * (1.0 - 1e-12) {
        out.push(k);
        k += 1;
    }
    out
}

fn center(c: &Cylinder) -> Vec<f64> {
    c.a.iter().zip(&c.b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Chain length and the (level, index) of the previous run, per run.
type ChainRow = Vec<(usize, Option<(usize, usize)>)>;

/// For every run, the longest nested chain ending at it (coarse to fine) and
/// the previous element of one such chain.
fn chain_table(levels: &[Vec<StraightRun>]) -> Vec<ChainRow> {
    let mut table: Vec<ChainRow> = Vec::new();
    for (li, runs) in levels.iter().enumerate() {
        let mut row: ChainRow = vec![(1, None); runs.len()];
        for (lj, coarse) in levels[..li].iter().enumerate() {
            if coarse.is_empty() || runs.is_empty() {
                continue;
            }
            // Bucket the fine runs by center; a contained run's center lies
            // within half a length plus a radius of the coarse center.
            let c0 = &coarse[0].cylinder;
            let cell = 0.5 * c0.length() + c0.radius;
            let key = |p: &[f64]| p.iter().map(|x| (x / cell).floor() as i64).collect::<Vec<i64>>();
            let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            for (j, r) in runs.iter().enumerate() {
                buckets.entry(key(&center(&r.cylinder))).or_default().push(j);
            }
            let d = c0.dim();
            for (i, big) in coarse.iter().enumerate() {
                let base = key(&center(&big.cylinder));
                for off in 0..3usize.pow(d as u32) {
                    let mut cellkey = base.clone();
                    let mut o = off;
                    for c in cellkey.iter_mut() {
                        *c += (o % 3) as i64 - 1;
                        o /= 3;
                    }
                    let Some(js) = buckets.get(&cellkey) else { continue };
                    for &j in js {
                        let cand = table[lj][i].0 + 1;
                        if cand > row[j].0 && big.cylinder.contains(&runs[j].cylinder) {
                            row[j] = (cand, Some((lj, i)));
                        }
                    }
                }
            }
        }
        table.push(row);
    }
    table
}

/// Minimal `k₀` for which straight runs are `(γ, k₀)`-sparse down to `δ`.
///
/// A violation at level `k₀` is a nested chain of `n >= k₀/2` runs at scale
/// indices `1 <= k_1 < ... < k_n <= 2n`. With `N*` the largest `n >= 1` such
/// that the runs at indices `<= 2n` contain a chain of length `n`, the answer
/// is `2N* + 1`, or `0` when no chain exists.
pub fn sparsity_k0(curve: &PolygonalCurve, gamma: f64, delta: f64) -> Result<SparsityResult, TortuosityError> {
    check_gamma(gamma)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(TortuosityError::InvalidParameter(format!("resolution must be positive, got {delta}")));
    }
    let levels = admissible_levels(gamma, delta.max(curve.step()));
    let runs: Vec<Vec<StraightRun>> =
        levels.iter().map(|&k| detect_straight_runs(curve, gamma, k)).collect::<Result<_, _>>()?;
    let table = chain_table(&runs);
    let mut best: Option<(u32, (usize, usize))> = None;
    for n in 1..=levels.len() as u32 {
        // Longest chain ending at a run with index <= 2n.
        let mut top: Option<(usize, (usize, usize))> = None;
        for (li, row) in table.iter().enumerate() {
            if levels[li] > 2 * n {
                continue;
            }
            for (j, &(len, _)) in row.iter().enumerate() {
                if top.is_none_or(|t| len > t.0) {
                    top = Some((len, (li, j)));
                }
            }
        }
        if let Some((len, end)) = top {
            if len >= n as usize {
                best = Some((n, end));
            }
        }
    }
    let runs_per_level = runs.iter().map(|r| r.len()).collect();
    let Some((n_star, end)) = best else {
        return Ok(SparsityResult { k0: 0, witness: None, levels, runs_per_level });
    };
    // Walk back from the end, then keep the last `n*` elements (the finest
    // ones), which still form a nested chain ending at index <= 2n*.
    let mut chain = Vec::new();
    let mut at = Some(end);
    while let Some((li, j)) = at {
        chain.push(runs[li][j].clone());
        at = table[li][j].1;
    }
    chain.reverse();
    let chain = chain.split_off(chain.len() - n_star as usize);
    Ok(SparsityResult { k0: 2 * n_star + 1, witness: Some(chain), levels, runs_per_level })
}

/// Independent re-check of a witness chain: strictly increasing levels, each
/// cylinder crossed, each nested in its predecessor, and geometry matching `γ`.
pub fn verify_chain(curve: &PolygonalCurve, gamma: f64, chain: &[StraightRun]) -> bool {
    let n = chain.len() as u32;
    chain.iter().enumerate().all(|(i, run)| {
        let scale = gamma.powi(-(run.level as i32));
        let c = &run.cylinder;
        (c.length() - scale).abs() <= 1e-9 * scale
            && (c.radius - run_radius(gamma, scale)).abs() <= 1e-9 * scale
            && run.level <= 2 * n
            && cylinder_crossed(curve, c)
            && (i == 0 || (chain[i - 1].level < run.level && chain[i - 1].cylinder.contains(c)))
    })
}

/// Empirical `P(k₀ > N)` for `N = 0..max` and the fit of `ln P` against `N`
/// over the points with positive frequency: `(tail, slope, R²)`.
pub fn k0_tail(k0s: &[u32]) -> (Vec<(u32, f64)>, Option<f64>, Option<f64>) {
    let max = k0s.iter().copied().max().unwrap_or(0);
    let n = k0s.len().max(1) as f64;
    let tail: Vec<(u32, f64)> = (0..=max).map(|t| (t, k0s.iter().filter(|&&k| k > t).count() as f64 / n)).collect();
    let pts: Vec<(f64, f64)> = tail.iter().filter(|p| p.1 > 0.0).map(|p| (f64::from(p.0), p.1.ln())).collect();
    (tail, least_squares_slope(&pts), r_squared(&pts))
}
