//! Square-lattice geometry kernel.
//!
//! Finite vertex sets of `Z^2` are stored as dense bit grids over their
//! tight bounding window. Edge boundaries are always taken against the full
//! lattice, never clipped to a box.

mod components;
mod enumerate;

pub use components::{component_containing, constant_sign_components, hole_descent, Component};
pub use enumerate::{
    enumerate_simply_connected, enumerate_simply_connected_with_cap, simply_connected_shapes,
    DEFAULT_PERIMETER_CAP,
};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("operation requires a nonempty vertex set")]
    EmptySet,
    #[error("perimeter bound {requested} exceeds the enumeration cap {cap}")]
    PerimeterCapExceeded { requested: usize, cap: usize },
    #[error("perimeter bound {0} is below the minimum perimeter 4")]
    PerimeterTooSmall(usize),
}

/// A vertex of `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x + 1, self.y),
            Site::new(self.x - 1, self.y),
            Site::new(self.x, self.y + 1),
            Site::new(self.x, self.y - 1),
        ]
    }

    pub fn offset(self, dx: i32, dy: i32) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }

    /// Sup norm, i.e. the index of the square ring containing the site.
    pub fn sup_norm(self) -> u32 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The box `Λ(L) = {-L..L}^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SquareBox {
    pub half_side: u32,
}

impl SquareBox {
    pub const fn new(half_side: u32) -> Self {
        SquareBox { half_side }
    }

    pub fn side(&self) -> usize {
        2 * self.half_side as usize + 1
    }

    pub fn vertex_count(&self) -> usize {
        self.side() * self.side()
    }

    pub fn contains(&self, s: Site) -> bool {
        s.sup_norm() <= self.half_side
    }

    /// Row-major index of a site, rows ordered by increasing `y`.
    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let l = self.half_side as i64;
        let side = self.side() as i64;
        Some(((s.y as i64 + l) * side + (s.x as i64 + l)) as usize)
    }

    pub fn site(&self, index: usize) -> Site {
        let side = self.side();
        let l = self.half_side as i32;
        Site::new((index % side) as i32 - l, (index / side) as i32 - l)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.vertex_count()).map(move |i| self.site(i))
    }

    pub fn window(&self) -> Window {
        let l = self.half_side as i32;
        Window::new(Site::new(-l, -l), self.side() as u32, self.side() as u32)
    }

    pub fn to_vertex_set(&self) -> VertexSet {
        VertexSet::from_window_fn(self.window(), |_| true)
    }

    /// Number of lattice edges joining a site of the box to a site outside it.
    pub fn outward_edges(&self, s: Site) -> u32 {
        if !self.contains(s) {
            return 0;
        }
        s.neighbors().iter().filter(|n| !self.contains(**n)).count() as u32
    }
}

/// An axis-aligned rectangle of sites, `min` corner inclusive, `width x height` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub min: Site,
    pub width: u32,
    pub height: u32,
}

impl Window {
    pub fn new(min: Site, width: u32, height: u32) -> Self {
        Window { min, width, height }
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        let dx = s.x as i64 - self.min.x as i64;
        let dy = s.y as i64 - self.min.y as i64;
        dx >= 0 && dy >= 0 && dx < self.width as i64 && dy < self.height as i64
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let dx = (s.x - self.min.x) as usize;
        let dy = (s.y - self.min.y) as usize;
        Some(dy * self.width as usize + dx)
    }

    pub fn site(&self, index: usize) -> Site {
        let w = self.width as usize;
        Site::new(self.min.x + (index % w) as i32, self.min.y + (index / w) as i32)
    }

    pub fn inflate(&self, by: u32) -> Window {
        Window::new(
            self.min.offset(-(by as i32), -(by as i32)),
            self.width + 2 * by,
            self.height + 2 * by,
        )
    }

    fn is_frame(&self, index: usize) -> bool {
        let w = self.width as usize;
        let (ix, iy) = (index % w, index / w);
        ix == 0 || iy == 0 || ix + 1 == w || iy + 1 == self.height as usize
    }
}

/// A finite subset of `Z^2`.
///
/// The bit grid always spans the tight bounding window of the members, so two
/// sets are equal (and hash equally) exactly when they have the same members.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    window: Window,
    bits: Vec<bool>,
    area: usize,
}

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet { window: Window::new(Site::ORIGIN, 0, 0), bits: Vec::new(), area: 0 }
    }

    pub fn singleton(s: Site) -> Self {
        VertexSet { window: Window::new(s, 1, 1), bits: vec![true], area: 1 }
    }

    pub fn from_sites<I: IntoIterator<Item = Site>>(sites: I) -> Self {
        let sites: Vec<Site> = sites.into_iter().collect();
        if sites.is_empty() {
            return Self::empty();
        }
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for s in &sites {
            x0 = x0.min(s.x);
            y0 = y0.min(s.y);
            x1 = x1.max(s.x);
            y1 = y1.max(s.y);
        }
        let window = Window::new(Site::new(x0, y0), (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32);
        let mut bits = vec![false; window.len()];
        let mut area = 0;
        for s in sites {
            let i = window.index(s).expect("site inside its bounding window");
            if !bits[i] {
                bits[i] = true;
                area += 1;
            }
        }
        VertexSet { window, bits, area }
    }

    /// Members are the sites of `window` satisfying `member`.
    pub fn from_window_fn<F: FnMut(Site) -> bool>(window: Window, mut member: F) -> Self {
        let sites: Vec<Site> = (0..window.len()).map(|i| window.site(i)).filter(|s| member(*s)).collect();
        Self::from_sites(sites)
    }

    /// Rectangle `[x0, x0 + width) x [y0, y0 + height)`.
    pub fn rectangle(min: Site, width: u32, height: u32) -> Self {
        Self::from_window_fn(Window::new(min, width, height), |_| true)
    }

    pub fn len(&self) -> usize {
        self.area
    }

    /// Area `|A|`.
    pub fn area(&self) -> usize {
        self.area
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        self.window.index(s).is_some_and(|i| self.bits[i])
    }

    /// Tight bounding window; `None` for the empty set.
    pub fn bounding_window(&self) -> Option<Window> {
        (!self.is_empty()).then_some(self.window)
    }

    /// Members in row-major order (increasing `y`, then `x`).
    pub fn iter(&self) -> impl Iterator<Item = Site> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(move |(i, _)| self.window.site(i))
    }

    pub fn first(&self) -> Option<Site> {
        self.iter().next()
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Self {
        let mut out = self.clone();
        out.window.min = out.window.min.offset(dx, dy);
        out
    }

    pub fn union(&self, other: &VertexSet) -> Self {
        Self::from_sites(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &VertexSet) -> Self {
        Self::from_sites(self.iter().filter(|s| other.contains(*s)))
    }

    pub fn difference(&self, other: &VertexSet) -> Self {
        Self::from_sites(self.iter().filter(|s| !other.contains(*s)))
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    pub fn restrict_to_box(&self, b: &SquareBox) -> Self {
        Self::from_sites(self.iter().filter(|s| b.contains(*s)))
    }

    /// Perimeter `|∂A|`, counted without materializing the edge set.
    pub fn perimeter(&self) -> usize {
        self.iter().map(|s| s.neighbors().iter().filter(|n| !self.contains(**n)).count()).sum()
    }

    /// All lattice edges with exactly one endpoint in the set.
    pub fn edge_boundary(&self) -> EdgeSet {
        let mut edges = BTreeSet::new();
        for s in self.iter() {
            for n in s.neighbors() {
                if !self.contains(n) {
                    edges.insert(Edge::new(s, n));
                }
            }
        }
        EdgeSet { edges }
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.first() else {
            return true;
        };
        let mut seen = vec![false; self.bits.len()];
        let mut queue = VecDeque::from([start]);
        seen[self.window.index(start).unwrap()] = true;
        let mut reached = 1;
        while let Some(s) = queue.pop_front() {
            for n in s.neighbors() {
                if let Some(i) = self.window.index(n) {
                    if self.bits[i] && !seen[i] {
                        seen[i] = true;
                        reached += 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        reached == self.area
    }

    /// Sites of the complement enclosed by the set, i.e. not connected to
    /// infinity in `Z^2 \ A`. Decided on the bounding window inflated by one.
    pub fn enclosed_sites(&self) -> Vec<Site> {
        if self.is_empty() {
            return Vec::new();
        }
        let w = self.window.inflate(1);
        let mut outside = vec![false; w.len()];
        let mut queue = VecDeque::new();
        for i in 0..w.len() {
            if w.is_frame(i) {
                outside[i] = true;
                queue.push_back(w.site(i));
            }
        }
        while let Some(s) = queue.pop_front() {
            for n in s.neighbors() {
                if let Some(i) = w.index(n) {
                    if !outside[i] && !self.contains(n) {
                        outside[i] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        (0..w.len()).filter(|&i| !outside[i] && !self.contains(w.site(i))).map(|i| w.site(i)).collect()
    }

    /// Connected, with connected complement in `Z^2`.
    pub fn is_simply_connected(&self) -> Result<bool, LatticeError> {
        if self.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        Ok(self.is_connected() && self.enclosed_sites().is_empty())
    }

    /// Maximal connected subsets.
    pub fn connected_components(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.bits.len()];
        let mut out = Vec::new();
        for (i, &b) in self.bits.iter().enumerate() {
            if !b || seen[i] {
                continue;
            }
            seen[i] = true;
            let mut members = vec![self.window.site(i)];
            let mut queue = VecDeque::from([self.window.site(i)]);
            while let Some(s) = queue.pop_front() {
                for n in s.neighbors() {
                    if let Some(j) = self.window.index(n) {
                        if self.bits[j] && !seen[j] {
                            seen[j] = true;
                            members.push(n);
                            queue.push_back(n);
                        }
                    }
                }
            }
            out.push(VertexSet::from_sites(members));
        }
        out
    }

    /// Sorted member list, used as a total order key.
    pub fn sorted_sites(&self) -> Vec<Site> {
        let mut v: Vec<Site> = self.iter().collect();
        v.sort();
        v
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<Site> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        Self::from_sites(iter)
    }
}

/// Unordered nearest-neighbor pair, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: Site,
    pub b: Site,
}

impl Edge {
    /// Panics unless the two sites are lattice neighbors.
    pub fn new(u: Site, v: Site) -> Self {
        assert_eq!((u.x - v.x).abs() + (u.y - v.y).abs(), 1, "{u} and {v} are not neighbors");
        if u < v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet {
    edges: BTreeSet<Edge>,
}

impl EdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }
}

/// Free-function form of [`VertexSet::edge_boundary`].
pub fn edge_boundary(a: &VertexSet) -> EdgeSet {
    a.edge_boundary()
}

/// Free-function form of [`VertexSet::is_simply_connected`].
pub fn is_simply_connected(a: &VertexSet) -> Result<bool, LatticeError> {
    a.is_simply_connected()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pts: &[(i32, i32)]) -> VertexSet {
        pts.iter().map(|&(x, y)| Site::new(x, y)).collect()
    }

    #[test]
    fn boundary_of_small_sets() {
        assert_eq!(edge_boundary(&set(&[(0, 0)])).len(), 4);
        assert_eq!(edge_boundary(&set(&[(0, 0), (1, 0)])).len(), 6);
        assert_eq!(edge_boundary(&set(&[(0, 0), (1, 0), (0, 1), (1, 1)])).len(), 8);
    }

    #[test]
    fn simple_connectivity_examples() {
        assert!(set(&[(0, 0)]).is_simply_connected().unwrap());
        let ring = VertexSet::rectangle(Site::new(-1, -1), 3, 3).difference(&set(&[(0, 0)]));
        assert!(!ring.is_simply_connected().unwrap());
        assert_eq!(ring.enclosed_sites(), vec![Site::ORIGIN]);
        assert!(set(&[(0, 0), (1, 0), (0, 1)]).is_simply_connected().unwrap());
        assert!(!set(&[(0, 0), (2, 0)]).is_simply_connected().unwrap());
        assert_eq!(VertexSet::empty().is_simply_connected(), Err(LatticeError::EmptySet));
    }

    #[test]
    fn box_indexing_round_trips() {
        let b = SquareBox::new(3);
        assert_eq!(b.vertex_count(), 49);
        for (i, s) in b.sites().enumerate() {
            assert_eq!(b.index(s), Some(i));
        }
        assert_eq!(b.index(Site::new(4, 0)), None);
        assert_eq!(b.outward_edges(Site::new(3, 3)), 2);
        assert_eq!(b.outward_edges(Site::new(3, 0)), 1);
        assert_eq!(b.outward_edges(Site::ORIGIN), 0);
    }

    #[test]
    fn equality_ignores_construction_order() {
        let a = set(&[(2, 1), (0, 0), (1, 0)]);
        let b = set(&[(0, 0), (1, 0), (2, 1), (1, 0)]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a.translate(1, 1), set(&[(3, 2), (1, 1), (2, 1)]));
    }

    fn arb_set() -> impl Strategy<Value = VertexSet> {
        prop::collection::vec((-6i32..6, -6i32..6), 1..40)
            .prop_map(|v| v.into_iter().map(|(x, y)| Site::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn perimeter_is_even_and_matches_edge_set(a in arb_set()) {
            let p = a.perimeter();
            prop_assert_eq!(p % 2, 0);
            prop_assert_eq!(p, a.edge_boundary().len());
        }

        #[test]
        fn boundary_edges_have_one_end_inside(a in arb_set()) {
            for e in a.edge_boundary().iter() {
                prop_assert!(a.contains(e.a) != a.contains(e.b));
            }
        }

        #[test]
        fn components_partition_the_set(a in arb_set()) {
            let comps = a.connected_components();
            prop_assert_eq!(comps.iter().map(|c| c.len()).sum::<usize>(), a.len());
            for c in &comps {
                prop_assert!(c.is_connected());
                prop_assert!(c.is_subset(&a));
            }
        }
    }
}
