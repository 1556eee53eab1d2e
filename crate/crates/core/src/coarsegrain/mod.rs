//! Block coarse graining of lattice sets, the two key lemmas, corridor events
//! and the large-field scan.

mod corridor;
mod qscan;

pub use corridor::{
    corridor_constants, corridor_event_frequencies, union_bound_check, CorridorFrequencies, CorridorSpec,
    LevelFrequency, UnionBoundReport,
};
pub use qscan::{scan_q_event, verify_violator, QScanReport, QViolator, ViolatorSource};

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disagreement::sample_disagreement;
use crate::lattice::{enumerate_simply_connected, LatticeError, Site, SquareBox, VertexSet};
use crate::rfim::{FieldDistribution, ModelParams};
use crate::rng::replicate_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoarseError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Union of the aligned `2^k x 2^k` tiles holding at least `2^{2k-1}` sites
/// of `gamma`. Level 0 is `gamma` itself.
pub fn coarse_grain(gamma: &VertexSet, k: u32) -> VertexSet {
    if k == 0 {
        return gamma.clone();
    }
    let side = 1i32 << k;
    let mut counts: HashMap<(i32, i32), u64> = HashMap::new();
    for s in gamma.iter() {
        *counts.entry((s.x.div_euclid(side), s.y.div_euclid(side))).or_default() += 1;
    }
    let need = 1u64 << (2 * k - 1);
    let mut sites = Vec::new();
    for (&(tx, ty), &c) in &counts {
        if c >= need {
            for dy in 0..side {
                for dx in 0..side {
                    sites.push(Site::new(tx * side + dx, ty * side + dy));
                }
            }
        }
    }
    VertexSet::from_sites(sites)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseSequence {
    pub start: VertexSet,
    /// `levels[k] = Γ_k`, each computed from `Γ` directly.
    pub levels: Vec<VertexSet>,
    pub confinement: Option<SquareBox>,
}

impl CoarseSequence {
    pub fn level(&self, k: usize) -> &VertexSet {
        &self.levels[k]
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }
}

pub fn coarse_sequence(gamma: &VertexSet, k_max: u32, confinement: Option<SquareBox>) -> CoarseSequence {
    let levels = (0..=k_max)
        .map(|k| {
            let g = coarse_grain(gamma, k);
            match &confinement {
                Some(b) => g.restrict_to_box(b),
                None => g,
            }
        })
        .collect();
    CoarseSequence { start: gamma.clone(), levels, confinement }
}

/// Connected components of the edge boundary, two dual edges being joined
/// when they share a corner.
pub fn boundary_components(set: &VertexSet) -> usize {
    let boundary = set.edge_boundary();
    let mut corner_id: HashMap<(i32, i32), usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut id = |c: (i32, i32), parent: &mut Vec<usize>| {
        *corner_id.entry(c).or_insert_with(|| {
            parent.push(parent.len());
            parent.len() - 1
        })
    };
    let mut touched = Vec::new();
    for e in boundary.iter() {
        // Corner (i, j) is the point (i - 1/2, j - 1/2).
        let (c0, c1) = if e.a.y == e.b.y { ((e.b.x, e.b.y), (e.b.x, e.b.y + 1)) } else { ((e.b.x, e.b.y), (e.b.x + 1, e.b.y)) };
        let (i, j) = (id(c0, &mut parent), id(c1, &mut parent));
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        parent[ri] = rj;
        touched.push(i);
    }
    let roots: HashSet<usize> = touched.into_iter().map(|i| find(&mut parent, i)).collect();
    roots.len()
}

/// The three inequalities of the first key lemma for one `(Γ, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLemma1Report {
    pub k: u32,
    pub perimeter: usize,
    pub area: usize,
    pub boundary_k: usize,
    /// `|Γ_k \ Γ_{k-1}|`.
    pub added: usize,
    /// `|Γ_{k-1} \ Γ_k|`.
    pub removed: usize,
    pub area_k: usize,
    pub boundary_components: usize,
    /// The lemma is stated for `k > 1`.
    pub in_domain: bool,
    /// `|∂Γ_k| < 8|∂Γ|`, `|Γ_k Δ Γ_{k-1}| < 16·2^k|∂Γ|` (each side), `|Γ_k| < 32·2^k|∂Γ| + |Γ|`.
    pub holds: [bool; 3],
    /// Achieved `|∂Γ_k|/|∂Γ|`, `max(added, removed)/(2^k|∂Γ|)`, `(|Γ_k| - |Γ|)/(2^k|∂Γ|)`.
    pub ratios: [f64; 3],
    /// `#components(∂Γ_k) <= 8|∂Γ|/2^k`.
    pub components_hold: bool,
}

impl KeyLemma1Report {
    /// Pass/fail verdict; levels outside the lemma's domain always pass.
    pub fn passes(&self) -> bool {
        !self.in_domain || (self.holds.iter().all(|&h| h) && self.components_hold)
    }
}

pub fn key_lemma1_check(gamma: &VertexSet, k: u32) -> KeyLemma1Report {
    key_lemma1_check_in(gamma, k, None)
}

pub fn key_lemma1_check_in(gamma: &VertexSet, k: u32, confinement: Option<SquareBox>) -> KeyLemma1Report {
    let confine = |g: VertexSet| match &confinement {
        Some(b) => g.restrict_to_box(b),
        None => g,
    };
    let gk = confine(coarse_grain(gamma, k));
    let prev = if k == 0 { gk.clone() } else { confine(coarse_grain(gamma, k - 1)) };
    let ell = gamma.perimeter();
    let scale = (1u64 << k) as f64 * ell as f64;
    let (added, removed) = (gk.difference(&prev).len(), prev.difference(&gk).len());
    let boundary_k = gk.perimeter();
    let components = boundary_components(&gk);
    KeyLemma1Report {
        k,
        perimeter: ell,
        area: gamma.len(),
        boundary_k,
        added,
        removed,
        area_k: gk.len(),
        boundary_components: components,
        in_domain: k > 1,
        holds: [
            boundary_k < 8 * ell,
            (added.max(removed) as f64) < 16.0 * scale,
            (gk.len() as f64) < 32.0 * scale + gamma.len() as f64,
        ],
        ratios: [
            boundary_k as f64 / ell as f64,
            added.max(removed) as f64 / scale,
            (gk.len() as f64 - gamma.len() as f64) / scale,
        ],
        components_hold: (components as f64) <= 8.0 * ell as f64 / (1u64 << k) as f64,
    }
}

/// Aggregate of key-lemma checks over a corpus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub sets: usize,
    pub checks: usize,
    pub failures: usize,
    /// Largest ratio seen for each inequality, within the lemma's domain.
    pub max_ratios: [f64; 3],
    pub max_component_ratio: f64,
}

impl CorpusSummary {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }

    fn absorb(&mut self, r: &KeyLemma1Report) {
        self.checks += 1;
        if !r.passes() {
            self.failures += 1;
        }
        if r.in_domain {
            for i in 0..3 {
                self.max_ratios[i] = self.max_ratios[i].max(r.ratios[i]);
            }
            let bound = 8.0 * r.perimeter as f64 / (1u64 << r.k) as f64;
            self.max_component_ratio = self.max_component_ratio.max(r.boundary_components as f64 / bound);
        }
    }

    fn merge(mut self, other: CorpusSummary) -> CorpusSummary {
        self.sets += other.sets;
        self.checks += other.checks;
        self.failures += other.failures;
        for i in 0..3 {
            self.max_ratios[i] = self.max_ratios[i].max(other.max_ratios[i]);
        }
        self.max_component_ratio = self.max_component_ratio.max(other.max_component_ratio);
        self
    }
}

/// First key lemma over a list of sets and levels.
pub fn verify_key_lemma1(sets: &[VertexSet], levels: &[u32], confinement: Option<SquareBox>) -> CorpusSummary {
    sets.par_iter()
        .map(|g| {
            let mut s = CorpusSummary { sets: 1, ..Default::default() };
            for &k in levels {
                s.absorb(&key_lemma1_check_in(g, k, confinement));
            }
            s
        })
        .reduce(CorpusSummary::default, CorpusSummary::merge)
}

/// First key lemma over every simply connected `Γ ∋ 0` with `|∂Γ| <= perimeter_max`.
pub fn verify_key_lemma1_corpus(perimeter_max: usize, levels: &[u32]) -> Result<CorpusSummary, CoarseError> {
    let sets: Vec<VertexSet> = enumerate_simply_connected(perimeter_max)?.collect();
    Ok(verify_key_lemma1(&sets, levels, None))
}

/// Connected pieces of sampled disagreement sets, `count` of them in sampling order.
pub fn disagreement_cluster_shapes(
    p: &ModelParams,
    distribution: FieldDistribution,
    half_side: u32,
    count: usize,
    seed: u64,
) -> Vec<VertexSet> {
    let mut out = Vec::with_capacity(count);
    let mut r = 0u64;
    while out.len() < count {
        let batch: Vec<Vec<VertexSet>> = (r..r + 8)
            .into_par_iter()
            .map(|i| sample_disagreement(half_side, p, distribution, replicate_seed(seed, i)).members.connected_components())
            .collect();
        r += 8;
        out.extend(batch.into_iter().flatten().take(count - out.len()));
        if r > 64 * count as u64 + 64 {
            break;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageCount {
    pub ell: usize,
    pub k: u32,
    pub images: usize,
    pub starting: usize,
    /// `log(images)·2^k / (ℓk + ℓ log ℓ)`.
    pub ratio: f64,
}

/// Distinct `Γ_k` over every simply connected `Γ ∋ 0` with `|∂Γ| = ℓ`.
pub fn count_coarse_images(ell: usize, k: u32) -> Result<ImageCount, CoarseError> {
    let sets: Vec<VertexSet> = enumerate_simply_connected(ell)?.filter(|g| g.perimeter() == ell).collect();
    let images: HashSet<VertexSet> = sets.par_iter().map(|g| coarse_grain(g, k)).collect::<Vec<_>>().into_iter().collect();
    let l = ell as f64;
    let ratio = (images.len() as f64).ln() * (1u64 << k) as f64 / (l * f64::from(k) + l * l.ln());
    Ok(ImageCount { ell, k, images: images.len(), starting: sets.len(), ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;
    use proptest::prelude::*;

    fn brute_coarse(gamma: &VertexSet, k: u32) -> VertexSet {
        let side = 1i32 << k;
        let Some(w) = gamma.bounding_window() else { return VertexSet::empty() };
        let wide = w.inflate(side as u32);
        VertexSet::from_window_fn(wide, |s| {
            let (x0, y0) = (s.x.div_euclid(side) * side, s.y.div_euclid(side) * side);
            let inside = (0..side).flat_map(|dy| (0..side).map(move |dx| Site::new(x0 + dx, y0 + dy))).filter(|t| gamma.contains(*t)).count();
            2 * inside as u64 >= 1u64 << (2 * k)
        })
    }

    #[test]
    fn aligned_tiles_are_fixed() {
        for k in 0..4 {
            let side = 1u32 << k;
            let tile = VertexSet::rectangle(Site::new(-(side as i32), 2 * side as i32), side, side);
            assert_eq!(coarse_grain(&tile, k), tile);
            let seq = coarse_sequence(&tile, k, None);
            assert!(seq.levels.iter().all(|g| *g == tile || g.is_empty()));
            assert_eq!(*seq.level(k as usize), tile);
        }
        let big = VertexSet::rectangle(Site::new(0, 0), 16, 16);
        assert!(coarse_sequence(&big, 4, None).levels.iter().all(|g| *g == big));
    }

    #[test]
    fn singleton_vanishes() {
        let s = VertexSet::singleton(Site::new(3, -5));
        assert!(coarse_grain(&s, 1).is_empty());
        assert_eq!(coarse_grain(&s, 0), s);
        for k in 0..5 {
            assert!(key_lemma1_check(&s, k).passes());
        }
    }

    #[test]
    fn half_full_tile_is_admissible() {
        let half = VertexSet::rectangle(Site::new(0, 0), 2, 1);
        assert_eq!(coarse_grain(&half, 1), VertexSet::rectangle(Site::new(0, 0), 2, 2));
        let shifted = VertexSet::rectangle(Site::new(1, 0), 2, 1);
        assert!(coarse_grain(&shifted, 1).is_empty());
    }

    #[test]
    fn confinement_never_grows_levels() {
        let g = VertexSet::rectangle(Site::new(-5, -5), 9, 7);
        let b = SquareBox::new(3);
        let free = coarse_sequence(&g, 3, None);
        let boxed = coarse_sequence(&g, 3, Some(b));
        for (a, c) in free.levels.iter().zip(&boxed.levels) {
            assert!(c.len() <= a.len());
            assert!(c.is_subset(a));
        }
    }

    #[test]
    fn boundary_component_counts() {
        assert_eq!(boundary_components(&VertexSet::empty()), 0);
        assert_eq!(boundary_components(&VertexSet::rectangle(Site::new(0, 0), 3, 2)), 1);
        let ring = VertexSet::from_window_fn(Window::new(Site::new(0, 0), 3, 3), |s| s != Site::new(1, 1));
        assert_eq!(boundary_components(&ring), 2);
        let apart = VertexSet::from_sites([Site::new(0, 0), Site::new(5, 0)]);
        assert_eq!(boundary_components(&apart), 2);
    }

    #[test]
    fn big_square_has_slack() {
        let r = key_lemma1_check(&VertexSet::rectangle(Site::new(-8, -8), 16, 16), 3);
        assert!(r.passes());
        assert_eq!(r.ratios, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn small_corpus_satisfies_the_lemma() {
        let s = verify_key_lemma1_corpus(10, &[0, 1, 2, 3, 4]).unwrap();
        assert!(s.all_pass(), "{s:?}");
        assert!(s.sets > 0);
    }

    #[test]
    fn image_counts() {
        let c = count_coarse_images(4, 1).unwrap();
        assert_eq!((c.starting, c.images), (1, 1));
        for (ell, k) in [(6, 1), (8, 1), (8, 2)] {
            let c = count_coarse_images(ell, k).unwrap();
            assert!(c.images <= c.starting);
        }
        assert!(count_coarse_images(40, 1).is_err());
    }

    fn arb_set() -> impl Strategy<Value = VertexSet> {
        prop::collection::vec((-6i32..6, -6i32..6), 0..40).prop_map(|v| v.into_iter().map(|(x, y)| Site::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn matches_per_tile_recount(g in arb_set(), k in 0u32..4) {
            prop_assert_eq!(coarse_grain(&g, k), brute_coarse(&g, k));
        }

        #[test]
        fn monotone_in_the_start(g in arb_set(), extra in arb_set(), k in 0u32..4) {
            let big = g.union(&extra);
            prop_assert!(coarse_grain(&g, k).is_subset(&coarse_grain(&big, k)));
        }
    }
}
