//! Exhaustive corpus of simply connected lattice sets.
//!
//! Fixed polyominoes are grown from their lowest cell with Redelmeier's
//! untried-set recursion, so each one is produced exactly once. A connected
//! set spanning a `w x h` bounding box has perimeter at least `2(w + h)`, and
//! the box only grows along a branch, so the semi-perimeter of the box is a
//! sound pruning bound.

use super::{LatticeError, Site, VertexSet};

/// Enumeration grows exponentially in the perimeter; larger requests are refused.
pub const DEFAULT_PERIMETER_CAP: usize = 18;

fn check_bound(perimeter_max: usize, cap: usize) -> Result<(), LatticeError> {
    if perimeter_max < 4 {
        return Err(LatticeError::PerimeterTooSmall(perimeter_max));
    }
    if perimeter_max > cap {
        return Err(LatticeError::PerimeterCapExceeded { requested: perimeter_max, cap });
    }
    Ok(())
}

/// Simply connected shapes with perimeter at most `perimeter_max`, one per
/// translation class, each anchored so that its lowest cell in row-major
/// order (smallest `y`, then smallest `x`) is the origin.
pub fn simply_connected_shapes(perimeter_max: usize) -> Result<Vec<VertexSet>, LatticeError> {
    check_bound(perimeter_max, DEFAULT_PERIMETER_CAP)?;
    Ok(grow_shapes(perimeter_max))
}

/// Every simply connected `A ∋ 0` with `|∂A| <= perimeter_max`, each exactly
/// once, ordered by perimeter, then area, then sorted member list.
pub fn enumerate_simply_connected(
    perimeter_max: usize,
) -> Result<impl Iterator<Item = VertexSet>, LatticeError> {
    enumerate_simply_connected_with_cap(perimeter_max, DEFAULT_PERIMETER_CAP)
}

pub fn enumerate_simply_connected_with_cap(
    perimeter_max: usize,
    cap: usize,
) -> Result<impl Iterator<Item = VertexSet>, LatticeError> {
    check_bound(perimeter_max, cap)?;
    let mut sets: Vec<(usize, usize, Vec<Site>, VertexSet)> = Vec::new();
    for shape in grow_shapes(perimeter_max) {
        let perimeter = shape.perimeter();
        for m in shape.iter() {
            let placed = shape.translate(-m.x, -m.y);
            sets.push((perimeter, placed.len(), placed.sorted_sites(), placed));
        }
    }
    sets.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
    Ok(sets.into_iter().map(|(_, _, _, s)| s))
}

struct Grower {
    semi_max: i32,
    perimeter_max: usize,
    span: i32,
    seen: Vec<bool>,
    cells: Vec<Site>,
    out: Vec<VertexSet>,
}

#[derive(Clone, Copy)]
struct Bounds {
    x0: i32,
    x1: i32,
    y0: i32,
    y1: i32,
}

impl Bounds {
    fn with(self, s: Site) -> Bounds {
        Bounds { x0: self.x0.min(s.x), x1: self.x1.max(s.x), y0: self.y0.min(s.y), y1: self.y1.max(s.y) }
    }

    fn semi_perimeter(&self) -> i32 {
        (self.x1 - self.x0 + 1) + (self.y1 - self.y0 + 1)
    }
}

impl Grower {
    fn slot(&self, s: Site) -> Option<usize> {
        // Cells above the origin row, or on it to the right.
        let allowed = s.y > 0 || (s.y == 0 && s.x >= 0);
        if !allowed || s.x.abs() > self.span || s.y > self.span {
            return None;
        }
        let width = (2 * self.span + 1) as usize;
        Some(s.y as usize * width + (s.x + self.span) as usize)
    }

    fn record(&mut self) {
        let set = VertexSet::from_sites(self.cells.iter().copied());
        if set.perimeter() <= self.perimeter_max && set.is_simply_connected().unwrap_or(false) {
            self.out.push(set);
        }
    }

    fn grow(&mut self, mut untried: Vec<Site>, bounds: Option<Bounds>) {
        while let Some(c) = untried.pop() {
            let nb = match bounds {
                Some(b) => b.with(c),
                None => Bounds { x0: c.x, x1: c.x, y0: c.y, y1: c.y },
            };
            if nb.semi_perimeter() > self.semi_max {
                continue;
            }
            self.cells.push(c);
            self.record();
            let mut added = Vec::new();
            for n in c.neighbors() {
                if let Some(i) = self.slot(n) {
                    if !self.seen[i] {
                        self.seen[i] = true;
                        added.push(n);
                    }
                }
            }
            let mut next = untried.clone();
            next.extend(added.iter().copied());
            self.grow(next, Some(nb));
            for n in added {
                let i = self.slot(n).unwrap();
                self.seen[i] = false;
            }
            self.cells.pop();
        }
    }
}

fn grow_shapes(perimeter_max: usize) -> Vec<VertexSet> {
    let semi_max = (perimeter_max / 2) as i32;
    let span = semi_max;
    let mut g = Grower {
        semi_max,
        perimeter_max,
        span,
        seen: vec![false; ((2 * span + 1) * (span + 1)) as usize],
        cells: Vec::new(),
        out: Vec::new(),
    };
    let origin = g.slot(Site::ORIGIN).unwrap();
    g.seen[origin] = true;
    g.grow(vec![Site::ORIGIN], None);
    let mut shapes = g.out;
    shapes.sort_by_cached_key(|s| (s.perimeter(), s.len(), s.sorted_sites()));
    shapes
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent generator: every subset of every `w x h` box that touches
    /// all rows and columns, filtered by perimeter and simple connectivity,
    /// then placed with each member on the origin.
    fn brute_force(perimeter_max: usize) -> HashSet<VertexSet> {
        let semi = perimeter_max / 2;
        let mut out = HashSet::new();
        for w in 1..semi {
            for h in 1..=(semi - w) {
                let cells = w * h;
                for mask in 1u64..(1u64 << cells) {
                    let sites: Vec<Site> = (0..cells)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| Site::new((i % w) as i32, (i / w) as i32))
                        .collect();
                    let set = VertexSet::from_sites(sites);
                    let win = set.bounding_window().unwrap();
                    if win.width as usize != w || win.height as usize != h {
                        continue;
                    }
                    if set.perimeter() > perimeter_max || !set.is_simply_connected().unwrap() {
                        continue;
                    }
                    for m in set.iter() {
                        out.insert(set.translate(-m.x, -m.y));
                    }
                }
            }
        }
        out
    }

    fn collect(p: usize) -> Vec<VertexSet> {
        enumerate_simply_connected(p).unwrap().collect()
    }

    #[test]
    fn perimeter_four_is_the_singleton() {
        assert_eq!(collect(4), vec![VertexSet::singleton(Site::ORIGIN)]);
    }

    #[test]
    fn perimeter_six_adds_the_four_dominoes() {
        let sets = collect(6);
        assert_eq!(sets.len(), 5);
        let dominoes: HashSet<VertexSet> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .map(|&(x, y)| VertexSet::from_sites([Site::ORIGIN, Site::new(x, y)]))
            .collect();
        for d in &dominoes {
            assert!(sets.contains(d));
        }
    }

    #[test]
    fn matches_brute_force_generator() {
        for p in [4, 6, 8, 10, 12] {
            let fast = collect(p);
            let unique: HashSet<VertexSet> = fast.iter().cloned().collect();
            assert_eq!(unique.len(), fast.len(), "duplicates at perimeter {p}");
            assert_eq!(unique, brute_force(p), "perimeter {p}");
        }
    }

    #[test]
    fn outputs_pass_their_own_filters() {
        for s in collect(12) {
            assert!(s.contains(Site::ORIGIN));
            assert!(s.perimeter() <= 12);
            assert!(s.is_simply_connected().unwrap());
        }
    }

    #[test]
    fn isoperimetric_inequality_holds_on_corpus() {
        for s in collect(14) {
            assert!(s.perimeter() as f64 >= 0.25 * (s.len() as f64).sqrt());
        }
    }

    #[test]
    fn shapes_are_translation_classes() {
        let shapes = simply_connected_shapes(10).unwrap();
        let total: usize = shapes.iter().map(|s| s.len()).sum();
        assert_eq!(total, collect(10).len());
    }

    #[test]
    fn order_is_deterministic() {
        assert_eq!(collect(10), collect(10));
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(matches!(enumerate_simply_connected(2), Err(LatticeError::PerimeterTooSmall(2))));
        assert!(matches!(
            enumerate_simply_connected(40),
            Err(LatticeError::PerimeterCapExceeded { requested: 40, .. })
        ));
        assert!(enumerate_simply_connected_with_cap(12, 10).is_err());
    }
}
