use serde::{Deserialize, Serialize};

use super::TortuosityError;

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Polygonal path with vertices a fixed step `δ` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonalCurve {
    dim: usize,
    coords: Vec<f64>,
    step: f64,
    diameter: f64,
}

impl PolygonalCurve {
    /// Consecutive points must be `step` apart up to `1e-9 · step`.
    pub fn new(points: &[Vec<f64>], step: f64) -> Result<Self, TortuosityError> {
        if points.len() < 2 {
            return Err(TortuosityError::TooFewPoints(points.len()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(TortuosityError::InvalidParameter(format!("step must be positive, got {step}")));
        }
        let dim = points[0].len();
        if dim < 2 || points.iter().any(|p| p.len() != dim) {
            return Err(TortuosityError::DimensionMismatch);
        }
        for (i, w) in points.windows(2).enumerate() {
            let d = dist(&w[0], &w[1]);
            if (d - step).abs() > 1e-9 * step {
                return Err(TortuosityError::StepMismatch { index: i, found: d, expected: step });
            }
        }
        let coords: Vec<f64> = points.iter().flatten().copied().collect();
        let mut c = PolygonalCurve { dim, coords, step, diameter: 0.0 };
        c.diameter = diameter_of((0..c.len()).map(|i| c.point(i)));
        Ok(c)
    }

    /// Planar curve through `scale · (x, y)` for a nearest-neighbour lattice path.
    pub fn from_lattice_path(path: &[crate::lattice::Site], scale: f64) -> Result<Self, TortuosityError> {
        let pts: Vec<Vec<f64>> = path.iter().map(|s| vec![scale * f64::from(s.x), scale * f64::from(s.y)]).collect();
        Self::new(&pts, scale)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim)
    }

    pub fn to_points(&self) -> Vec<Vec<f64>> {
        self.points().map(|p| p.to_vec()).collect()
    }

    /// Consecutive vertex pairs.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        (1..self.len()).map(move |i| (self.point(i - 1), self.point(i)))
    }
}

/// Largest pairwise distance, quadratic in the number of points.
pub fn diameter_of<'a>(points: impl Iterator<Item = &'a [f64]>) -> f64 {
    let pts: Vec<&[f64]> = points.collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(dist(pts[i], pts[j]));
        }
    }
    best
}

/// Curves sharing one step, inside an axis-aligned window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSystem {
    pub curves: Vec<PolygonalCurve>,
    pub step: f64,
    /// `(lower, upper)` corner of the window.
    pub window: (Vec<f64>, Vec<f64>),
}

impl CurveSystem {
    pub fn new(curves: Vec<PolygonalCurve>, step: f64, window: (Vec<f64>, Vec<f64>)) -> Result<Self, TortuosityError> {
        for c in &curves {
            if (c.step() - step).abs() > 1e-9 * step {
                return Err(TortuosityError::StepMismatch { index: 0, found: c.step(), expected: step });
            }
            if c.dim() != window.0.len() {
                return Err(TortuosityError::DimensionMismatch);
            }
            let inside = c.points().all(|p| {
                p.iter().zip(window.0.iter().zip(&window.1)).all(|(x, (lo, hi))| *x >= lo - 1e-12 && *x <= hi + 1e-12)
            });
            if !inside {
                return Err(TortuosityError::OutsideWindow);
            }
        }
        Ok(CurveSystem { curves, step, window })
    }

    pub fn empty(step: f64, window: (Vec<f64>, Vec<f64>)) -> Self {
        CurveSystem { curves: Vec::new(), step, window }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    #[test]
    fn step_is_enforced() {
        assert!(PolygonalCurve::new(&[vec![0.0, 0.0], vec![1.0, 0.0]], 1.0).is_ok());
        assert!(matches!(
            PolygonalCurve::new(&[vec![0.0, 0.0], vec![1.5, 0.0]], 1.0),
            Err(TortuosityError::StepMismatch { index: 0, .. })
        ));
        assert!(matches!(PolygonalCurve::new(&[vec![0.0, 0.0]], 1.0), Err(TortuosityError::TooFewPoints(1))));
    }

    #[test]
    fn lattice_paths_embed_with_their_scale() {
        let path = [Site::new(0, 0), Site::new(1, 0), Site::new(1, 1)];
        let c = PolygonalCurve::from_lattice_path(&path, 0.5).unwrap();
        assert_eq!(c.point(2), &[0.5, 0.5]);
        assert!((c.diameter() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.segments().count(), 2);
    }

    #[test]
    fn systems_reject_curves_outside_the_window() {
        let c = PolygonalCurve::new(&[vec![0.0, 0.0], vec![1.0, 0.0]], 1.0).unwrap();
        assert!(CurveSystem::new(vec![c.clone()], 1.0, (vec![0.0, 0.0], vec![1.0, 1.0])).is_ok());
        assert!(CurveSystem::new(vec![c], 1.0, (vec![0.0, 0.0], vec![0.5, 1.0])).is_err());
    }
}
