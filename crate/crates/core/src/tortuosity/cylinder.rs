use serde::{Deserialize, Serialize};

use super::curve::{dist, PolygonalCurve};
use super::TortuosityError;

/// Tolerance for touching a base and for geometric containment.
pub const GEOMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub radius: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Cylinder {
    pub fn new(a: Vec<f64>, b: Vec<f64>, radius: f64) -> Result<Self, TortuosityError> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(TortuosityError::DimensionMismatch);
        }
        if !(radius.is_finite() && radius > 0.0) || dist(&a, &b) <= 0.0 {
            return Err(TortuosityError::InvalidParameter("cylinder needs positive length and radius".into()));
        }
        Ok(Cylinder { a, b, radius })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn length(&self) -> f64 {
        dist(&self.a, &self.b)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.length() / self.radius
    }

    fn axis(&self) -> Vec<f64> {
        let len = self.length();
        self.a.iter().zip(&self.b).map(|(x, y)| (y - x) / len).collect()
    }

    /// Axial coordinate in units of the length (`0` on base `a`, `1` on base
    /// `b`) and squared distance from the axis line.
    pub fn coordinates(&self, p: &[f64]) -> (f64, f64) {
        let u = self.axis();
        let rel: Vec<f64> = p.iter().zip(&self.a).map(|(x, y)| x - y).collect();
        let along = dot(&rel, &u);
        let perp2 = (dot(&rel, &rel) - along * along).max(0.0);
        (along / self.length(), perp2)
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        let (t, perp2) = self.coordinates(p);
        let tol = GEOMETRY_TOLERANCE;
        t >= -tol && t <= 1.0 + tol && perp2.sqrt() <= self.radius * (1.0 + tol) + tol
    }

    /// Parameter interval `[lo, hi] ⊆ [0, 1]` of `p + τ (q - p)` inside the cylinder.
    fn segment_interval(&self, p: &[f64], q: &[f64]) -> Option<(f64, f64)> {
        let u = self.axis();
        let len = self.length();
        let w: Vec<f64> = p.iter().zip(&self.a).map(|(x, y)| x - y).collect();
        let v: Vec<f64> = q.iter().zip(p).map(|(x, y)| x - y).collect();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // Axial slab: 0 <= (w + τ v)·u <= len.
        let (t0, dt) = (dot(&w, &u), dot(&v, &u));
        let slack = GEOMETRY_TOLERANCE * len.max(1.0);
        if dt.abs() < 1e-300 {
            if t0 < -slack || t0 > len + slack {
                return None;
            }
        } else {
            let (x, y) = ((-slack - t0) / dt, (len + slack - t0) / dt);
            lo = lo.max(x.min(y));
            hi = hi.min(x.max(y));
        }
        // Radial: |P(w + τ v)|² <= r², a quadratic in τ.
        let pw: Vec<f64> = w.iter().zip(&u).map(|(x, ui)| x - t0 * ui).collect();
        let pv: Vec<f64> = v.iter().zip(&u).map(|(x, ui)| x - dt * ui).collect();
        let r = self.radius * (1.0 + GEOMETRY_TOLERANCE) + GEOMETRY_TOLERANCE;
        let (qa, qb, qc) = (dot(&pv, &pv), 2.0 * dot(&pw, &pv), dot(&pw, &pw) - r * r);
        if qa < 1e-300 {
            if qc > 0.0 {
                return None;
            }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            lo = lo.max((-qb - sq) / (2.0 * qa));
            hi = hi.min((-qb + sq) / (2.0 * qa));
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Whether `other ⊆ self`. Exact in the plane, where a cylinder is a
    /// rectangle; in higher dimensions a sufficient test bounding each base disc.
    pub fn contains(&self, other: &Cylinder) -> bool {
        if other.dim() != self.dim() {
            return false;
        }
        let u = other.axis();
        if self.dim() == 2 {
            let w = [-u[1] * other.radius, u[0] * other.radius];
            return [&other.a, &other.b].iter().all(|c| {
                self.contains_point(&[c[0] + w[0], c[1] + w[1]]) && self.contains_point(&[c[0] - w[0], c[1] - w[1]])
            });
        }
        let us = self.axis();
        let cos = dot(&u, &us).clamp(-1.0, 1.0);
        let axial_spread = other.radius * (1.0 - cos * cos).sqrt() / self.length();
        [&other.a, &other.b].iter().all(|c| {
            let (t, perp2) = self.coordinates(c);
            let tol = GEOMETRY_TOLERANCE;
            t - axial_spread >= -tol
                && t + axial_spread <= 1.0 + tol
                && perp2.sqrt() + other.radius <= self.radius * (1.0 + tol) + tol
        })
    }
}

/// Whether some maximal sub-path of the curve inside the cylinder meets both bases.
pub fn cylinder_crossed(curve: &PolygonalCurve, c: &Cylinder) -> bool {
    if curve.dim() != c.dim() {
        return false;
    }
    let tol = GEOMETRY_TOLERANCE;
    // Current inside run: extreme axial coordinates seen so far.
    let mut run: Option<(f64, f64)> = None;
    for (p, q) in curve.segments() {
        let Some((lo, hi)) = c.segment_interval(p, q) else {
            run = None;
            continue;
        };
        let at = |tau: f64| {
            let x: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + tau * (b - a)).collect();
            c.coordinates(&x).0
        };
        let (t_lo, t_hi) = (at(lo), at(hi));
        let (seg_min, seg_max) = (t_lo.min(t_hi), t_lo.max(t_hi));
        let joined = match run {
            Some((mn, mx)) if lo <= tol => (mn.min(seg_min), mx.max(seg_max)),
            _ => (seg_min, seg_max),
        };
        if joined.0 <= tol && joined.1 >= 1.0 - tol {
            return true;
        }
        run = (hi >= 1.0 - tol).then_some(joined);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(pts: &[[f64; 2]], step: f64) -> PolygonalCurve {
        let v: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        PolygonalCurve::new(&v, step).unwrap()
    }

    fn straight(x0: f64, x1: f64, step: f64) -> PolygonalCurve {
        let n = ((x1 - x0) / step).round() as usize;
        let pts: Vec<[f64; 2]> = (0..=n).map(|i| [x0 + i as f64 * step, 0.0]).collect();
        curve(&pts, step)
    }

    #[test]
    fn segment_along_the_axis_crosses() {
        let c = Cylinder::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.1).unwrap();
        assert!(cylinder_crossed(&straight(-0.5, 1.5, 0.25), &c));
        assert!(cylinder_crossed(&straight(0.0, 1.0, 0.25), &c));
    }

    #[test]
    fn touching_one_base_is_not_a_crossing() {
        let c = Cylinder::new(vec![0.0, 0.0], vec![1.0, 0.0], 0.1).unwrap();
        assert!(!cylinder_crossed(&straight(-0.5, 0.75, 0.25), &c));
    }

    #[test]
    fn leaving_through_the_side_breaks_the_run() {
        let c = Cylinder::new(vec![0.0, 0.0], vec![2.0, 0.0], 0.5).unwrap();
        // Out through the side at x = 1 and back in.
        let pts = [[-0.5, 0.0], [0.5, 0.0], [0.5, 1.0], [1.5, 1.0], [1.5, 0.0], [2.5, 0.0]];
        assert!(!cylinder_crossed(&curve(&pts, 1.0), &c));
        let pts2 = [[-0.6, 0.3], [0.4, 0.3], [1.4, 0.3], [2.4, 0.3]];
        assert!(cylinder_crossed(&curve(&pts2, 1.0), &c));
    }

    #[test]
    fn oblique_cylinders() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = Cylinder::new(vec![0.0, 0.0], vec![3.0 * s, 3.0 * s], 0.2).unwrap();
        let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 * s - s, i as f64 * s - s]).collect();
        assert!(cylinder_crossed(&curve(&pts, 1.0), &c));
        assert!((c.aspect_ratio() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn containment_in_the_plane() {
        let big = Cylinder::new(vec![0.0, 0.0], vec![10.0, 0.0], 2.0).unwrap();
        let inner = Cylinder::new(vec![2.0, 0.5], vec![4.0, 0.5], 1.0).unwrap();
        let poking = Cylinder::new(vec![2.0, 1.5], vec![4.0, 1.5], 1.0).unwrap();
        let tilted = Cylinder::new(vec![5.0, -1.0], vec![5.0, 1.0], 0.5).unwrap();
        assert!(big.contains(&inner));
        assert!(!big.contains(&poking));
        assert!(big.contains(&tilted));
        assert!(!inner.contains(&big));
        assert!(big.contains(&big));
    }

    #[test]
    fn containment_in_three_dimensions_is_sound() {
        let big = Cylinder::new(vec![0.0, 0.0, 0.0], vec![10.0, 0.0, 0.0], 2.0).unwrap();
        let inner = Cylinder::new(vec![2.0, 0.5, 0.0], vec![4.0, 0.5, 0.0], 1.0).unwrap();
        let out = Cylinder::new(vec![2.0, 0.0, 1.5], vec![4.0, 0.0, 1.5], 1.0).unwrap();
        assert!(big.contains(&inner));
        assert!(!big.contains(&out));
    }
}
