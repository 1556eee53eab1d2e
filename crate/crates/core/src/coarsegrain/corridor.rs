use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coarse_sequence, CoarseError};
use crate::lattice::{enumerate_simply_connected, simply_connected_shapes, Site, SquareBox, VertexSet};
use crate::rfim::{sample_field, FieldDistribution, ModelParams, RandomField};
use crate::rng::replicate_seed;
use crate::stats::Proportion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpec {
    pub ell: usize,
    /// `⌊log₂ ℓ⌋`.
    pub n_ell: u32,
    /// `Jℓ / (8 N_ℓ ε)`.
    pub c_ell: f64,
    pub levels: Vec<u32>,
}

pub fn corridor_constants(ell: usize, p: &ModelParams) -> Result<CorridorSpec, CoarseError> {
    if ell < 2 {
        return Err(CoarseError::InvalidParams(format!("ℓ = {ell} gives N_ℓ = 0")));
    }
    if !(p.disorder > 0.0) {
        return Err(CoarseError::InvalidParams("ε must be positive".into()));
    }
    let n_ell = usize::BITS - 1 - ell.leading_zeros();
    let c_ell = p.coupling * ell as f64 / (8.0 * f64::from(n_ell) * p.disorder);
    Ok(CorridorSpec { ell, n_ell, c_ell, levels: (1..=n_ell).collect() })
}

/// Deduplicated site-index lists whose field sums the corridor events bound.
struct CorridorIndex {
    /// `lists[k]` for `k < N_ℓ`: both `Γ_{k+1} \ Γ_k` and `Γ_k \ Γ_{k+1}`.
    /// `lists[N_ℓ]`: `Γ_{N_ℓ}`.
    lists: Vec<Vec<Vec<u32>>>,
    sets: usize,
}

fn placements(b: &SquareBox, shape: &VertexSet) -> impl Iterator<Item = VertexSet> {
    let l = b.half_side as i32;
    let w = shape.bounding_window().expect("shapes are nonempty");
    let (x0, y0) = (w.min.x, w.min.y);
    let (x1, y1) = (x0 + w.width as i32 - 1, y0 + w.height as i32 - 1);
    let shape = shape.clone();
    (-l - y0..=l - y1).flat_map(move |dy| {
        let shape = shape.clone();
        (-l - x0..=l - x1).map(move |dx| shape.translate(dx, dy))
    })
}

impl CorridorIndex {
    fn build(b: SquareBox, ell: usize, n_ell: u32) -> Result<Self, CoarseError> {
        let shapes: Vec<VertexSet> = simply_connected_shapes(ell)?.into_iter().filter(|s| s.perimeter() == ell).collect();
        let index = |s: Site| b.index(s).expect("confined to the box") as u32;
        let per_set: Vec<Vec<Vec<Vec<u32>>>> = shapes
            .par_iter()
            .flat_map_iter(|shape| placements(&b, shape).collect::<Vec<_>>())
            .map(|g| {
                let seq = coarse_sequence(&g, n_ell, Some(b));
                let mut out = vec![Vec::new(); n_ell as usize + 1];
                for k in 0..n_ell as usize {
                    let (lo, hi) = (seq.level(k), seq.level(k + 1));
                    out[k].push(hi.difference(lo).iter().map(index).collect());
                    out[k].push(lo.difference(hi).iter().map(index).collect());
                }
                out[n_ell as usize].push(seq.level(n_ell as usize).iter().map(index).collect());
                out
            })
            .collect();
        let sets = per_set.len();
        let mut lists: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n_ell as usize + 1];
        for (k, list) in lists.iter_mut().enumerate() {
            let unique: HashSet<Vec<u32>> = per_set.iter().flat_map(|s| s[k].iter().cloned()).filter(|v| !v.is_empty()).collect();
            let mut v: Vec<Vec<u32>> = unique.into_iter().collect();
            v.sort();
            *list = v;
        }
        Ok(CorridorIndex { lists, sets })
    }

    /// Per-level violation flags `|Σ h| > c_ℓ` for one field.
    fn violations(&self, h: &[f64], c_ell: f64) -> Vec<bool> {
        self.lists
            .iter()
            .map(|level| level.iter().any(|idx| idx.iter().map(|&i| h[i as usize]).sum::<f64>().abs() > c_ell))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelFrequency {
    pub k: u32,
    /// Whether `k` is one of the event's own levels; `k = 0` is the extra
    /// `Γ₀ → Γ₁` step needed to telescope `Σ_Γ h`.
    pub in_definition: bool,
    pub frequency: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorFrequencies {
    pub spec: CorridorSpec,
    pub box_half_side: u32,
    /// Placed starting sets `Γ ⊆ Λ(L)` with `|∂Γ| = ℓ`.
    pub sets: usize,
    /// `E_k(ℓ)^c` for `k = 0..=N_ℓ`; the last entry is the total-mass variant.
    pub levels: Vec<LevelFrequency>,
    /// Some `E_k(ℓ)^c`, `1 <= k <= N_ℓ`.
    pub any: Proportion,
    pub seed: u64,
}

impl CorridorFrequencies {
    pub fn level(&self, k: u32) -> &LevelFrequency {
        &self.levels[k as usize]
    }
}

fn check_box(half_side: u32, ell: usize) -> Result<(), CoarseError> {
    if (2 * half_side as usize + 1) * 4 < ell {
        return Err(CoarseError::InvalidParams(format!("Λ({half_side}) holds no set with perimeter {ell}")));
    }
    Ok(())
}

/// Frequencies of `E_k(ℓ)^c` over `n` fields on `Λ(L)`, with coarse levels confined to the box.
pub fn corridor_event_frequencies(
    p: &ModelParams,
    distribution: FieldDistribution,
    half_side: u32,
    ell: usize,
    n: usize,
    seed: u64,
) -> Result<CorridorFrequencies, CoarseError> {
    let spec = corridor_constants(ell, p)?;
    check_box(half_side, ell)?;
    let b = SquareBox::new(half_side);
    let index = CorridorIndex::build(b, ell, spec.n_ell)?;
    let flags: Vec<Vec<bool>> = (0..n as u64)
        .into_par_iter()
        .map(|r| index.violations(sample_field(half_side, distribution, replicate_seed(seed, r)).values(), spec.c_ell))
        .collect();
    let levels = (0..=spec.n_ell)
        .map(|k| LevelFrequency {
            k,
            in_definition: k >= 1,
            frequency: Proportion::from_flags(flags.iter().map(|f| f[k as usize])),
        })
        .collect();
    let any = Proportion::from_flags(flags.iter().map(|f| f[1..].iter().any(|&x| x)));
    Ok(CorridorFrequencies { spec, box_half_side: half_side, sets: index.sets, levels, any, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionBoundReport {
    pub perimeter_budget: usize,
    /// Some simply connected `Γ ∋ 0` inside the box with `|∂Γ|` within budget
    /// and `|Σ_Γ h| >= (J/2ε)|∂Γ|`.
    pub q_frequency: Proportion,
    /// `Σ_ℓ Σ_{k=0}^{N_ℓ}` of the empirical corridor failure frequencies.
    pub corridor_sum: f64,
    pub holds: bool,
    /// Every sample with the large-field event also fails some corridor event.
    pub per_sample_inclusion: bool,
}

fn q_event(h: &RandomField, p: &ModelParams, candidates: &[VertexSet]) -> bool {
    candidates.iter().any(|g| {
        let sum: f64 = g.iter().map(|s| h.at(s)).sum();
        sum.abs() >= p.coupling / (2.0 * p.disorder) * g.perimeter() as f64
    })
}

/// Empirical check of `P(Q) <= Σ_ℓ Σ_k P(E_k(ℓ)^c)` with `Q` restricted to the
/// perimeter budget and `k` starting at 0.
pub fn union_bound_check(
    p: &ModelParams,
    distribution: FieldDistribution,
    half_side: u32,
    perimeter_budget: usize,
    n: usize,
    seed: u64,
) -> Result<UnionBoundReport, CoarseError> {
    let b = SquareBox::new(half_side);
    let candidates: Vec<VertexSet> =
        enumerate_simply_connected(perimeter_budget)?.filter(|g| g.iter().all(|s| b.contains(s))).collect();
    let ells: Vec<usize> = (4..=perimeter_budget).step_by(2).collect();
    let mut indices = Vec::new();
    for &ell in &ells {
        let spec = corridor_constants(ell, p)?;
        indices.push((spec.c_ell, CorridorIndex::build(b, ell, spec.n_ell)?));
    }
    let per_sample: Vec<(bool, Vec<Vec<bool>>)> = (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let h = sample_field(half_side, distribution, replicate_seed(seed, r));
            let q = q_event(&h, p, &candidates);
            let corridor = indices.iter().map(|(c, idx)| idx.violations(h.values(), *c)).collect();
            (q, corridor)
        })
        .collect();
    let q_frequency = Proportion::from_flags(per_sample.iter().map(|s| s.0));
    let mut corridor_sum = 0.0;
    for (i, (_, idx)) in indices.iter().enumerate() {
        for k in 0..idx.lists.len() {
            corridor_sum += per_sample.iter().filter(|s| s.1[i][k]).count() as f64 / n.max(1) as f64;
        }
    }
    let per_sample_inclusion = per_sample.iter().all(|(q, c)| !q || c.iter().flatten().any(|&x| x));
    Ok(UnionBoundReport {
        perimeter_budget,
        q_frequency,
        corridor_sum,
        holds: q_frequency.mean <= corridor_sum,
        per_sample_inclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corridor_formulas() {
        let p = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        let c = corridor_constants(8, &p).unwrap();
        assert_eq!(c.n_ell, 3);
        assert!((c.c_ell - 2.0 / 3.0).abs() < 1e-15);
        let c2 = corridor_constants(2, &p).unwrap();
        assert_eq!(c2.n_ell, 1);
        assert!((c2.c_ell - 1.0 / (4.0 * 0.5)).abs() < 1e-15);
        let doubled = ModelParams::new(2.0, 1.0, 0.0).unwrap();
        assert!((corridor_constants(8, &doubled).unwrap().c_ell - c.c_ell).abs() < 1e-15);
        assert!(corridor_constants(1, &p).is_err());
        assert!(corridor_constants(8, &ModelParams::new(1.0, 0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn placements_fill_the_box() {
        let b = SquareBox::new(2);
        let domino = VertexSet::rectangle(Site::new(0, 0), 2, 1);
        let all: Vec<VertexSet> = placements(&b, &domino).collect();
        assert_eq!(all.len(), 4 * 5);
        assert!(all.iter().all(|g| g.iter().all(|s| b.contains(s))));
    }

    #[test]
    fn tiny_disorder_never_fails() {
        let p = ModelParams::new(1.0, 0.01, 0.0).unwrap();
        let f = corridor_event_frequencies(&p, FieldDistribution::Gaussian, 6, 8, 20, 1).unwrap();
        assert!(f.levels.iter().all(|l| l.frequency.mean == 0.0));
        assert_eq!(f.levels.len(), 4);
    }

    #[test]
    fn vanishing_coupling_always_fails() {
        let p = ModelParams::new(1e-9, 1.0, 0.0).unwrap();
        let f = corridor_event_frequencies(&p, FieldDistribution::Gaussian, 6, 8, 10, 1).unwrap();
        // Γ₃ is empty for these small sets; level 1 always carries Γ₁.
        assert!(f.level(3).frequency.mean == 0.0);
        assert_eq!(f.level(1).frequency.mean, 1.0);
    }

    #[test]
    fn union_bound_holds_sample_by_sample() {
        for eps in [0.3, 1.0, 3.0] {
            let p = ModelParams::new(1.0, eps, 0.0).unwrap();
            let r = union_bound_check(&p, FieldDistribution::Gaussian, 4, 8, 40, 2).unwrap();
            assert!(r.holds && r.per_sample_inclusion, "{r:?}");
        }
    }
}
