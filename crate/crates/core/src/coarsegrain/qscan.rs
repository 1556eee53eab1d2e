use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::CoarseError;
use crate::lattice::{constant_sign_components, simply_connected_shapes, Site, SquareBox, VertexSet};
use crate::rfim::{ground_state_pair, ModelParams, RandomField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolatorSource {
    Enumerated,
    GroundStateComponent,
}

/// A simply connected `Γ` with `|Σ_Γ h| >= (J/2ε)|∂Γ|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QViolator {
    pub sites: Vec<Site>,
    pub field_sum: f64,
    pub perimeter: usize,
    pub threshold: f64,
    pub source: ViolatorSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QScanReport {
    pub perimeter_budget: usize,
    pub violators: Vec<QViolator>,
    pub enumerated_checked: usize,
    pub components_checked: usize,
    /// The enumerated part covered every simply connected set in the box
    /// with perimeter within budget.
    pub complete_within_budget: bool,
}

fn threshold(p: &ModelParams, perimeter: usize) -> f64 {
    p.coupling / (2.0 * p.disorder) * perimeter as f64
}

fn evaluate(h: &RandomField, p: &ModelParams, g: &VertexSet, source: ViolatorSource) -> Option<QViolator> {
    let sum: f64 = g.iter().map(|s| h.at(s)).sum();
    let perimeter = g.perimeter();
    let t = threshold(p, perimeter);
    (sum.abs() >= t).then(|| QViolator { sites: g.sorted_sites(), field_sum: sum, perimeter, threshold: t, source })
}

/// Recomputes the violated inequality from scratch.
pub fn verify_violator(h: &RandomField, p: &ModelParams, v: &QViolator) -> bool {
    let g = VertexSet::from_sites(v.sites.iter().copied());
    let b = h.domain();
    g.len() == v.sites.len()
        && g.iter().all(|s| b.contains(s))
        && g.is_simply_connected().unwrap_or(false)
        && evaluate(h, p, &g, v.source).is_some()
}

/// Searches `Λ(L)` for simply connected sets with `|Σ_Γ h| >= (J/2ε)|∂Γ|`:
/// every translate of every shape with perimeter within budget, then the
/// simply connected constant-sign components of both ground states.
pub fn scan_q_event(h: &RandomField, p: &ModelParams, perimeter_budget: usize) -> Result<QScanReport, CoarseError> {
    p.validate().map_err(|e| CoarseError::InvalidParams(e.to_string()))?;
    if !(p.disorder > 0.0) {
        return Err(CoarseError::InvalidParams("ε must be positive".into()));
    }
    let b: SquareBox = h.domain();
    let l = b.half_side as i32;
    let mut seen: HashSet<Vec<Site>> = HashSet::new();
    let mut violators = Vec::new();
    let mut enumerated_checked = 0;
    for shape in simply_connected_shapes(perimeter_budget)? {
        let w = shape.bounding_window().expect("shapes are nonempty");
        let (x0, y0) = (w.min.x, w.min.y);
        let (x1, y1) = (x0 + w.width as i32 - 1, y0 + w.height as i32 - 1);
        for dy in -l - y0..=l - y1 {
            for dx in -l - x0..=l - x1 {
                let g = shape.translate(dx, dy);
                enumerated_checked += 1;
                if let Some(v) = evaluate(h, p, &g, ViolatorSource::Enumerated) {
                    seen.insert(v.sites.clone());
                    violators.push(v);
                }
            }
        }
    }
    let mut components_checked = 0;
    let (plus, minus) = ground_state_pair(h, p);
    for sigma in [&plus, &minus] {
        for c in constant_sign_components(sigma) {
            if !c.sites.is_simply_connected().unwrap_or(false) {
                continue;
            }
            components_checked += 1;
            if let Some(v) = evaluate(h, p, &c.sites, ViolatorSource::GroundStateComponent) {
                if seen.insert(v.sites.clone()) {
                    violators.push(v);
                }
            }
        }
    }
    Ok(QScanReport { perimeter_budget, violators, enumerated_checked, components_checked, complete_within_budget: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_has_no_violators() {
        let h = RandomField::from_values(SquareBox::new(4), vec![0.0; 81]);
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let r = scan_q_event(&h, &p, 10).unwrap();
        assert!(r.violators.is_empty());
        assert!(r.enumerated_checked > 0);
    }

    #[test]
    fn planted_block_is_found() {
        // 4M >= (J/2ε)·8 with J = 1, ε = 0.5 needs M >= 2.
        let m = 2.5;
        let h = RandomField::from_fn(SquareBox::new(4), |s| if (0..2).contains(&s.x) && (0..2).contains(&s.y) { m } else { 0.0 });
        let p = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        let r = scan_q_event(&h, &p, 8).unwrap();
        let block = VertexSet::rectangle(Site::new(0, 0), 2, 2).sorted_sites();
        assert!(r.violators.iter().any(|v| v.sites == block));
        assert!(r.violators.iter().all(|v| verify_violator(&h, &p, v)));
    }

    #[test]
    fn tiny_disorder_has_no_violators() {
        let h = RandomField::from_fn(SquareBox::new(3), |s| f64::from(s.x - s.y).sin());
        let p = ModelParams::new(1.0, 1e-6, 0.0).unwrap();
        assert!(scan_q_event(&h, &p, 12).unwrap().violators.is_empty());
    }

    #[test]
    fn sampled_violators_reverify() {
        let p = ModelParams::new(1.0, 2.0, 0.0).unwrap();
        for seed in 0..5 {
            let h = crate::rfim::sample_field(5, crate::rfim::FieldDistribution::Gaussian, seed);
            let r = scan_q_event(&h, &p, 10).unwrap();
            assert!(!r.violators.is_empty());
            assert!(r.violators.iter().all(|v| verify_violator(&h, &p, v)));
        }
    }
}
