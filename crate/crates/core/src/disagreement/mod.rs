//! Zero-temperature disagreement percolation and its crossing events.

mod rescale;

pub use rescale::{clip_region_contains, rescale_site, rescale_to_curve_system, RESCALED_HALF_WIDTH};

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Site, SquareBox, VertexSet, Window};
use crate::rfim::{ground_state_pair, sample_field, Boundary, FieldDistribution, ModelParams, SpinConfiguration};
use crate::rng::replicate_seed;
use crate::stats::Proportion;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisagreementError {
    #[error("expected a plus-boundary and a minus-boundary configuration")]
    BoundaryMismatch,
    #[error("configurations live on different boxes")]
    BoxMismatch,
    #[error("site {0} has σ⁺ = -1 and σ⁻ = +1; the pair is not monotone")]
    NotMonotone(Site),
    #[error("the disagreement set lives on Λ({have}), the annulus needs Λ({need})")]
    BoxTooSmall { have: u32, need: u32 },
    #[error("rectangle must have aspect ratio 1:{expected}, got {width}x{height}")]
    AspectMismatch { expected: u32, width: u32, height: u32 },
    #[error("short side {0} is odd; the concentric 3a x 15a rectangle would not be lattice-aligned")]
    OddShortSide(u32),
    #[error("rectangle {0:?} is not inside the region |v|∞ ∈ [5ℓ/4, 7ℓ/4]")]
    NotInAnnulus(LatticeRectangle),
    #[error("rectangle family violates: {}", .0.join("; "))]
    Geometry(Vec<String>),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Sites where the plus- and minus-boundary ground states differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisagreementSet {
    pub domain: SquareBox,
    pub members: VertexSet,
    /// Field seed, when the set came from a sampled field.
    pub seed: Option<u64>,
}

impl DisagreementSet {
    pub fn from_members(domain: SquareBox, members: VertexSet) -> Self {
        DisagreementSet { members: members.restrict_to_box(&domain), domain, seed: None }
    }

    pub fn contains(&self, s: Site) -> bool {
        self.members.contains(s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn disagreement_set(plus: &SpinConfiguration, minus: &SpinConfiguration) -> Result<DisagreementSet, DisagreementError> {
    if plus.boundary() != Boundary::Plus || minus.boundary() != Boundary::Minus {
        return Err(DisagreementError::BoundaryMismatch);
    }
    if plus.domain() != minus.domain() {
        return Err(DisagreementError::BoxMismatch);
    }
    let domain = plus.domain();
    let mut members = Vec::new();
    for (i, (&p, &m)) in plus.spins().iter().zip(minus.spins()).enumerate() {
        if p != m {
            if p < m {
                return Err(DisagreementError::NotMonotone(domain.site(i)));
            }
            members.push(domain.site(i));
        }
    }
    Ok(DisagreementSet { domain, members: VertexSet::from_sites(members), seed: None })
}

/// Disagreement set of the ground states for one sampled field.
pub fn sample_disagreement(
    half_side: u32,
    p: &ModelParams,
    distribution: FieldDistribution,
    field_seed: u64,
) -> DisagreementSet {
    let h = sample_field(half_side, distribution, field_seed);
    let (plus, minus) = ground_state_pair(&h, p);
    let mut d = disagreement_set(&plus, &minus).expect("ground states are monotone");
    d.seed = Some(field_seed);
    d
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub crossed: bool,
    /// Vertex count of a shortest crossing.
    pub length: Option<usize>,
    pub path: Vec<Site>,
}

/// Shortest path through `D ∩ region` from a source site to a target site.
fn bfs_crossing(
    d: &DisagreementSet,
    window: Window,
    region: impl Fn(Site) -> bool,
    source: impl Fn(Site) -> bool,
    target: impl Fn(Site) -> bool,
) -> CrossingReport {
    let inside = |s: Site| window.contains(s) && region(s) && d.contains(s);
    let mut parent: Vec<Option<usize>> = vec![None; window.len()];
    let mut seen = vec![false; window.len()];
    let mut queue = VecDeque::new();
    for i in 0..window.len() {
        let s = window.site(i);
        if inside(s) && source(s) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let s = window.site(i);
        if target(s) {
            let mut path = vec![s];
            let mut at = i;
            while let Some(p) = parent[at] {
                path.push(window.site(p));
                at = p;
            }
            path.reverse();
            return CrossingReport { crossed: true, length: Some(path.len()), path };
        }
        for n in s.neighbors() {
            if let Some(j) = window.index(n) {
                if !seen[j] && inside(n) {
                    seen[j] = true;
                    parent[j] = Some(i);
                    queue.push_back(j);
                }
            }
        }
    }
    CrossingReport { crossed: false, length: None, path: Vec::new() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCrossing {
    pub report: CrossingReport,
    /// `A_{α,ℓ}`: crossed by a path of at most `ℓ^{1+α}` vertices.
    pub event: bool,
}

/// Crossing of `Λ(2ℓ) \ Λ(ℓ)` from the sites at sup-norm `ℓ + 1` to those at
/// sup-norm `2ℓ`, staying inside the annulus.
pub fn annulus_crossing(d: &DisagreementSet, ell: u32, alpha: f64) -> Result<AnnulusCrossing, DisagreementError> {
    if ell == 0 {
        return Err(DisagreementError::InvalidParams("ℓ must be positive".into()));
    }
    if d.domain.half_side < 2 * ell {
        return Err(DisagreementError::BoxTooSmall { have: d.domain.half_side, need: 2 * ell });
    }
    let window = SquareBox::new(2 * ell).window();
    let report = bfs_crossing(
        d,
        window,
        |s| s.sup_norm() > ell && s.sup_norm() <= 2 * ell,
        |s| s.sup_norm() == ell + 1,
        |s| s.sup_norm() == 2 * ell,
    );
    let event = report.length.is_some_and(|len| (len as f64) <= f64::from(ell).powf(1.0 + alpha));
    Ok(AnnulusCrossing { report, event })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Axis-aligned block of lattice sites `[x₀, x₀ + width) × [y₀, y₀ + height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeRectangle {
    pub min: Site,
    pub width: u32,
    pub height: u32,
}

impl LatticeRectangle {
    pub fn new(min: Site, width: u32, height: u32) -> Result<Self, DisagreementError> {
        if width == 0 || height == 0 {
            return Err(DisagreementError::InvalidParams("rectangle sides must be positive".into()));
        }
        Ok(LatticeRectangle { min, width, height })
    }

    pub fn max(&self) -> Site {
        self.min.offset(self.width as i32 - 1, self.height as i32 - 1)
    }

    /// Axis of the long side; squares count as horizontal.
    pub fn long_axis(&self) -> Axis {
        if self.width >= self.height {
            Axis::X
        } else {
            Axis::Y
        }
    }

    pub fn short_side(&self) -> u32 {
        self.width.min(self.height)
    }

    pub fn long_side(&self) -> u32 {
        self.width.max(self.height)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            f64::from(self.min.x) + f64::from(self.width - 1) / 2.0,
            f64::from(self.min.y) + f64::from(self.height - 1) / 2.0,
        )
    }

    pub fn contains(&self, s: Site) -> bool {
        let m = self.max();
        s.x >= self.min.x && s.x <= m.x && s.y >= self.min.y && s.y <= m.y
    }

    pub fn window(&self) -> Window {
        Window::new(self.min, self.width, self.height)
    }

    /// `ℓ¹` distance between the two closed blocks.
    pub fn l1_distance(&self, other: &LatticeRectangle) -> u32 {
        let gap = |a0: i32, a1: i32, b0: i32, b1: i32| (b0 - a1).max(a0 - b1).max(0) as u32;
        let (a, b) = (self.max(), other.max());
        gap(self.min.x, a.x, other.min.x, b.x) + gap(self.min.y, a.y, other.min.y, b.y)
    }

    /// Whether all sites satisfy `inner <= |v|∞ <= outer`.
    pub fn inside_square_annulus(&self, inner: f64, outer: f64) -> bool {
        let m = self.max();
        let within = [self.min.x, m.x, self.min.y, m.y].iter().all(|&c| f64::from(c).abs() <= outer);
        let clear = f64::from(m.x) <= -inner
            || f64::from(self.min.x) >= inner
            || f64::from(m.y) <= -inner
            || f64::from(self.min.y) >= inner;
        within && clear
    }
}

/// Disagreement path inside `R` joining its two faces orthogonal to `axis`.
pub fn crossed_along(d: &DisagreementSet, r: &LatticeRectangle, axis: Axis) -> CrossingReport {
    let (lo, hi) = (r.min, r.max());
    match axis {
        Axis::X => bfs_crossing(d, r.window(), |_| true, |s| s.x == lo.x, |s| s.x == hi.x),
        Axis::Y => bfs_crossing(d, r.window(), |_| true, |s| s.y == lo.y, |s| s.y == hi.y),
    }
}

/// Crossing of `R` in the long direction, between its two short sides.
pub fn rectangle_crossed(d: &DisagreementSet, r: &LatticeRectangle) -> bool {
    crossed_along(d, r, r.long_axis()).crossed
}

/// Aspect ratio of the rectangles the shrinking construction accepts.
pub const H2_ASPECT: u32 = 200;

/// The concentric `3a x 15a` rectangle for a `a x 200a` rectangle `R`, with
/// its long sides parallel to the short sides of `R`. A lengthwise crossing
/// of `R` passes through it between its long sides, i.e. along `R`'s long axis.
/// `R'` must lie in `|v|∞ ∈ [5ℓ/4, 7ℓ/4]`.
pub fn shrink_rectangle(r: &LatticeRectangle, ell: u32) -> Result<LatticeRectangle, DisagreementError> {
    let a = r.short_side();
    if r.long_side() != H2_ASPECT * a {
        return Err(DisagreementError::AspectMismatch { expected: H2_ASPECT, width: r.width, height: r.height });
    }
    if a % 2 == 1 {
        return Err(DisagreementError::OddShortSide(a));
    }
    let (along, across) = (3 * a, 15 * a);
    let shrunk = match r.long_axis() {
        Axis::X => LatticeRectangle {
            min: r.min.offset(((r.width - along) / 2) as i32, -(((across - r.height) / 2) as i32)),
            width: along,
            height: across,
        },
        Axis::Y => LatticeRectangle {
            min: r.min.offset(-(((across - r.width) / 2) as i32), ((r.height - along) / 2) as i32),
            width: across,
            height: along,
        },
    };
    let l = f64::from(ell);
    if !shrunk.inside_square_annulus(1.25 * l, 1.75 * l) {
        return Err(DisagreementError::NotInAnnulus(shrunk));
    }
    Ok(shrunk)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryPolicy {
    /// Every condition of the rectangle-family lemma.
    #[default]
    Strict,
    /// Drops `ℓ(R) ∈ [10, ℓ/160]`, which is empty for `ℓ < 1600`.
    Relaxed,
}

/// Checks a rectangle family: sides `ℓ(R) x 5ℓ(R)`, short side in
/// `[10, ℓ/160]` (strict only), pairwise `ℓ¹` distance at least `60` times
/// the larger short side, all inside `|v|∞ ∈ [5ℓ/4, 7ℓ/4]`.
pub fn validate_family(family: &[LatticeRectangle], ell: u32, policy: GeometryPolicy) -> Result<(), DisagreementError> {
    let mut problems = Vec::new();
    let l = f64::from(ell);
    for (i, r) in family.iter().enumerate() {
        if r.long_side() != 5 * r.short_side() {
            problems.push(format!("rectangle {i} is {}x{}, not 1:5", r.width, r.height));
        }
        if policy == GeometryPolicy::Strict && !(r.short_side() >= 10 && f64::from(r.short_side()) <= l / 160.0) {
            problems.push(format!("rectangle {i} short side {} outside [10, ℓ/160 = {}]", r.short_side(), l / 160.0));
        }
        if !r.inside_square_annulus(1.25 * l, 1.75 * l) {
            problems.push(format!("rectangle {i} is not inside |v|∞ ∈ [{}, {}]", 1.25 * l, 1.75 * l));
        }
        for (j, q) in family.iter().enumerate().skip(i + 1) {
            let need = 60 * r.short_side().max(q.short_side());
            if r.l1_distance(q) < need {
                problems.push(format!("rectangles {i} and {j} are {} apart in ℓ¹, need {need}", r.l1_distance(q)));
            }
        }
    }
    if family.is_empty() {
        problems.push("family is empty".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(DisagreementError::Geometry(problems))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingStatistics {
    pub ell: u32,
    pub per_rectangle: Vec<Proportion>,
    pub joint: Proportion,
    /// `joint^{1/|family|}`.
    pub rho_hat: f64,
    /// Per-replicate crossing flags, in replicate order.
    pub replicates: Vec<Vec<bool>>,
    pub seed: u64,
}

/// Monte Carlo crossing frequencies for a rectangle family on `Λ(2ℓ)`.
pub fn estimate_crossing_statistics(
    p: &ModelParams,
    distribution: FieldDistribution,
    ell: u32,
    family: &[LatticeRectangle],
    policy: GeometryPolicy,
    n: usize,
    seed: u64,
) -> Result<CrossingStatistics, DisagreementError> {
    p.validate().map_err(|e| DisagreementError::InvalidParams(e.to_string()))?;
    validate_family(family, ell, policy)?;
    if n == 0 {
        return Err(DisagreementError::InvalidParams("sample count must be at least 1".into()));
    }
    let replicates: Vec<Vec<bool>> = (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let d = sample_disagreement(2 * ell, p, distribution, replicate_seed(seed, r));
            family.iter().map(|rect| rectangle_crossed(&d, rect)).collect()
        })
        .collect();
    let per_rectangle =
        (0..family.len()).map(|i| Proportion::from_flags(replicates.iter().map(|f| f[i]))).collect();
    let joint = Proportion::from_flags(replicates.iter().map(|f| f.iter().all(|&b| b)));
    let rho_hat = joint.mean.powf(1.0 / family.len() as f64);
    Ok(CrossingStatistics { ell, per_rectangle, joint, rho_hat, replicates, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(l: u32) -> DisagreementSet {
        let b = SquareBox::new(l);
        DisagreementSet::from_members(b, b.to_vertex_set())
    }

    fn from_sites(l: u32, sites: impl IntoIterator<Item = Site>) -> DisagreementSet {
        DisagreementSet::from_members(SquareBox::new(l), VertexSet::from_sites(sites))
    }

    #[test]
    fn zero_disorder_disagrees_everywhere() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let d = sample_disagreement(4, &p, FieldDistribution::Gaussian, 1);
        assert_eq!(d.members, SquareBox::new(4).to_vertex_set());
    }

    #[test]
    fn identical_configurations_agree() {
        let b = SquareBox::new(3);
        let plus = SpinConfiguration::from_fn(b, Boundary::Plus, |s| if s.x > 0 { 1 } else { -1 });
        let minus = SpinConfiguration::from_fn(b, Boundary::Minus, |s| if s.x > 0 { 1 } else { -1 });
        assert!(disagreement_set(&plus, &minus).unwrap().is_empty());
        assert_eq!(disagreement_set(&minus, &plus), Err(DisagreementError::BoundaryMismatch));
        let bad = SpinConfiguration::uniform(b, Boundary::Minus, 1);
        let low = SpinConfiguration::from_fn(b, Boundary::Plus, |s| if s == Site::ORIGIN { -1 } else { 1 });
        assert!(matches!(disagreement_set(&low, &bad), Err(DisagreementError::NotMonotone(_))));
    }

    #[test]
    fn size_matches_spin_sum() {
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        for seed in 0..100 {
            let h = sample_field(5, FieldDistribution::Gaussian, seed);
            let (plus, minus) = ground_state_pair(&h, &p);
            let d = disagreement_set(&plus, &minus).unwrap();
            let sum: i32 = plus.spins().iter().zip(minus.spins()).map(|(a, b)| i32::from(a - b)).sum();
            assert_eq!(2 * d.len() as i32, sum);
        }
    }

    #[test]
    fn full_annulus_geodesic() {
        for ell in [1, 3, 8] {
            let c = annulus_crossing(&full(2 * ell), ell, 0.1).unwrap();
            assert!(c.report.crossed && c.event);
            assert_eq!(c.report.length, Some(ell as usize));
            let path = &c.report.path;
            assert!(path.windows(2).all(|w| (w[0].x - w[1].x).abs() + (w[0].y - w[1].y).abs() == 1));
        }
    }

    #[test]
    fn empty_and_ring_sets_do_not_cross() {
        assert!(!annulus_crossing(&from_sites(8, []), 4, 0.5).unwrap().report.crossed);
        let ring = from_sites(8, SquareBox::new(8).sites().filter(|s| s.sup_norm() == 6));
        assert!(!annulus_crossing(&ring, 4, 0.5).unwrap().report.crossed);
        assert!(matches!(annulus_crossing(&ring, 5, 0.5), Err(DisagreementError::BoxTooSmall { .. })));
    }

    #[test]
    fn long_winding_crossing_misses_the_event() {
        // A radial spoke has length ℓ; with α = 0 the event needs length <= ℓ.
        let ell = 6;
        let spoke = from_sites(12, (7..=12).map(|x| Site::new(x, 0)));
        let c = annulus_crossing(&spoke, ell, 0.0).unwrap();
        assert!(c.event);
        // A detour of one step is too long at α = 0.
        let detour = from_sites(
            12,
            [7, 8].iter().map(|&x| Site::new(x, 0)).chain([Site::new(8, 1), Site::new(9, 1)]).chain((9..=12).map(|x| Site::new(x, 0))),
        );
        let c = annulus_crossing(&detour, ell, 0.0).unwrap();
        assert!(c.report.crossed);
        assert!(c.report.length.unwrap() >= ell as usize);
    }

    #[test]
    fn rectangle_crossings() {
        let r = LatticeRectangle::new(Site::new(2, -1), 10, 2).unwrap();
        assert!(rectangle_crossed(&full(15), &r));
        let line = from_sites(15, (0..15).map(|x| Site::new(x, 0)));
        assert!(rectangle_crossed(&line, &r));
        // Leaves the rectangle between the short sides: no contained crossing.
        let bent = from_sites(
            15,
            (2..6)
                .map(|x| Site::new(x, 0))
                .chain((0..=3).map(|y| Site::new(6, y)))
                .chain([Site::new(7, 3)])
                .chain((0..=3).map(|y| Site::new(8, y)))
                .chain((8..12).map(|x| Site::new(x, 0))),
        );
        assert!(!rectangle_crossed(&bent, &r));
        let vertical = from_sites(15, (-1..=0).map(|y| Site::new(5, y)));
        assert!(!rectangle_crossed(&vertical, &r));
        assert!(crossed_along(&vertical, &r, Axis::Y).crossed);
    }

    #[test]
    fn shrinking_geometry() {
        let ell = 128;
        let r = LatticeRectangle::new(Site::new(-200, 190), 400, 2).unwrap();
        let s = shrink_rectangle(&r, ell).unwrap();
        assert_eq!((s.width, s.height), (6, 30));
        assert_eq!(s.center(), r.center());
        let rv = LatticeRectangle::new(Site::new(190, -200), 2, 400).unwrap();
        let sv = shrink_rectangle(&rv, ell).unwrap();
        assert_eq!((sv.width, sv.height), (30, 6));
        assert_eq!(sv.center(), rv.center());
        // Its own output is not a 1:200 rectangle.
        assert!(matches!(shrink_rectangle(&s, ell), Err(DisagreementError::AspectMismatch { .. })));
        let odd = LatticeRectangle::new(Site::new(-100, 190), 200, 1).unwrap();
        assert_eq!(shrink_rectangle(&odd, ell), Err(DisagreementError::OddShortSide(1)));
        let inner = LatticeRectangle::new(Site::new(-200, 100), 400, 2).unwrap();
        assert!(matches!(shrink_rectangle(&inner, ell), Err(DisagreementError::NotInAnnulus(_))));
    }

    #[test]
    fn lengthwise_crossings_carry_over_to_the_shrunk_rectangle() {
        let ell = 128;
        let r = LatticeRectangle::new(Site::new(-200, 190), 400, 2).unwrap();
        let s = shrink_rectangle(&r, ell).unwrap();
        for y in [190, 191] {
            for wiggle in [false, true] {
                let sites = (-200..200).map(|x| Site::new(x, if wiggle && x % 7 == 0 { 191 } else { y }));
                let mut all: Vec<Site> = sites.collect();
                if wiggle {
                    all.extend((-200..200).filter(|x| x % 7 == 0).flat_map(|x| [Site::new(x, 190), Site::new(x, 191)]));
                    all.extend((-200..200).map(|x| Site::new(x, 190)));
                }
                let d = from_sites(2 * ell, all);
                assert!(rectangle_crossed(&d, &r));
                assert!(crossed_along(&d, &s, r.long_axis()).crossed);
            }
        }
    }

    #[test]
    fn family_validation() {
        let ell = 64;
        let r = LatticeRectangle::new(Site::new(92, -20), 8, 40).unwrap();
        assert!(matches!(validate_family(&[r], ell, GeometryPolicy::Strict), Err(DisagreementError::Geometry(_))));
        assert!(validate_family(&[r], ell, GeometryPolicy::Relaxed).is_ok());
        let close = LatticeRectangle::new(Site::new(92, 30), 8, 40).unwrap();
        let err = validate_family(&[r, close], ell, GeometryPolicy::Relaxed).unwrap_err();
        assert!(err.to_string().contains("apart"));
        let big = 3200u32;
        let a = LatticeRectangle::new(Site::new(4500, 0), 10, 50).unwrap();
        assert!(validate_family(&[a], big, GeometryPolicy::Strict).is_ok());
    }

    #[test]
    fn crossing_statistics_are_reproducible_and_consistent() {
        let ell = 64;
        let family = [
            LatticeRectangle::new(Site::new(90, -5), 2, 10).unwrap(),
            LatticeRectangle::new(Site::new(-91, -5), 2, 10).unwrap(),
        ];
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let g = FieldDistribution::Gaussian;
        let a = estimate_crossing_statistics(&p, g, ell, &family, GeometryPolicy::Relaxed, 8, 5).unwrap();
        let b = estimate_crossing_statistics(&p, g, ell, &family, GeometryPolicy::Relaxed, 8, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.per_rectangle.iter().all(|f| a.joint.mean <= f.mean));
        let zero = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let z = estimate_crossing_statistics(&zero, g, ell, &family, GeometryPolicy::Relaxed, 2, 5).unwrap();
        assert_eq!(z.joint.mean, 1.0);
    }
}
