use super::{ModelParams, RandomField, RfimError, SpinConfiguration};
use crate::lattice::VertexSet;

fn check_boxes(sigma: &SpinConfiguration, h: &RandomField) -> Result<(), RfimError> {
    if sigma.domain() != h.domain() {
        return Err(RfimError::BoxMismatch { config: sigma.half_side(), field: h.half_side() });
    }
    Ok(())
}

/// `H(σ)`: internal pairs, pairs coupling a box spin to the frozen boundary,
/// and the single-site term.
pub fn energy(sigma: &SpinConfiguration, h: &RandomField, p: &ModelParams) -> Result<f64, RfimError> {
    check_boxes(sigma, h)?;
    let domain = sigma.domain();
    let bc = f64::from(sigma.boundary().sign());
    let mut pair = 0.0;
    let mut single = 0.0;
    for (i, s) in domain.sites().enumerate() {
        let si = f64::from(sigma.spins()[i]);
        // Each internal pair is counted from its lower-left endpoint.
        for n in [s.offset(1, 0), s.offset(0, 1)] {
            if let Some(j) = domain.index(n) {
                pair += si * f64::from(sigma.spins()[j]);
            }
        }
        pair += si * bc * f64::from(domain.outward_edges(s));
        single += p.site_field(h.values()[i]) * si;
    }
    Ok(-p.coupling * pair - single)
}

/// `H(σ with Γ flipped) - H(σ)`, from the edges leaving `Γ` and the field on `Γ`.
pub fn flip_energy(
    sigma: &SpinConfiguration,
    gamma: &VertexSet,
    h: &RandomField,
    p: &ModelParams,
) -> Result<f64, RfimError> {
    check_boxes(sigma, h)?;
    let domain = sigma.domain();
    let mut delta = 0.0;
    for u in gamma.iter() {
        let i = domain.index(u).ok_or(RfimError::SetOutsideBox(domain.half_side))?;
        let su = f64::from(sigma.spins()[i]);
        for v in u.neighbors() {
            if !gamma.contains(v) {
                delta += 2.0 * p.coupling * su * f64::from(sigma.spin(v));
            }
        }
        delta += 2.0 * p.site_field(h.values()[i]) * su;
    }
    Ok(delta)
}

pub fn single_flip_energy(
    sigma: &SpinConfiguration,
    site: crate::lattice::Site,
    h: &RandomField,
    p: &ModelParams,
) -> Result<f64, RfimError> {
    flip_energy(sigma, &VertexSet::singleton(site), h, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Site, SquareBox};
    use crate::rfim::{sample_field, Boundary, FieldDistribution};
    use proptest::prelude::*;

    fn zero_field(l: u32) -> RandomField {
        RandomField::from_fn(SquareBox::new(l), |_| 0.0)
    }

    #[test]
    fn all_plus_on_three_by_three() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let s = SpinConfiguration::uniform(SquareBox::new(1), Boundary::Plus, 1);
        assert_eq!(energy(&s, &zero_field(1), &p).unwrap(), -24.0);
        let p2 = ModelParams::new(2.5, 0.0, 0.0).unwrap();
        assert_eq!(energy(&s, &zero_field(1), &p2).unwrap(), -60.0);
    }

    #[test]
    fn flipping_the_whole_box() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        for l in 0..5u32 {
            let b = SquareBox::new(l);
            let s = SpinConfiguration::uniform(b, Boundary::Plus, 1);
            let d = flip_energy(&s, &b.to_vertex_set(), &zero_field(l), &p).unwrap();
            assert_eq!(d, 2.0 * 4.0 * f64::from(2 * l + 1));
        }
    }

    #[test]
    fn mismatched_boxes_are_rejected() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let s = SpinConfiguration::uniform(SquareBox::new(1), Boundary::Plus, 1);
        assert_eq!(
            energy(&s, &zero_field(2), &p),
            Err(RfimError::BoxMismatch { config: 1, field: 2 })
        );
    }

    #[test]
    fn ferromagnetic_minimum_at_l1() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let b = SquareBox::new(1);
        let h = zero_field(1);
        let best = energy(&SpinConfiguration::uniform(b, Boundary::Plus, 1), &h, &p).unwrap();
        for mask in 0u32..512 {
            let spins = (0..9).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            let s = SpinConfiguration::from_spins(b, Boundary::Plus, spins).unwrap();
            assert!(energy(&s, &h, &p).unwrap() >= best);
        }
    }

    proptest! {
        #[test]
        fn flip_energy_matches_recomputation(
            seed in any::<u64>(),
            mask in any::<u32>(),
            gamma_mask in any::<u32>(),
            eps in 0.0f64..3.0,
            eta in -1.0f64..1.0,
            minus in any::<bool>(),
            lower in any::<bool>(),
        ) {
            let b = SquareBox::new(2);
            let h = sample_field(2, FieldDistribution::Gaussian, seed);
            let mut p = ModelParams::new(1.0, eps, eta).unwrap();
            if lower {
                p.convention = crate::rfim::FieldConvention::LowerBound;
            }
            let bc = if minus { Boundary::Minus } else { Boundary::Plus };
            let s = SpinConfiguration::from_fn(b, bc, |q| {
                let i = b.index(q).unwrap();
                if mask >> i & 1 == 1 { 1 } else { -1 }
            });
            let gamma: VertexSet = b.sites().filter(|q| gamma_mask >> b.index(*q).unwrap() & 1 == 1).collect();
            let flipped = s.with_flipped(&gamma).unwrap();
            let direct = energy(&flipped, &h, &p).unwrap() - energy(&s, &h, &p).unwrap();
            let incremental = flip_energy(&s, &gamma, &h, &p).unwrap();
            prop_assert!((direct - incremental).abs() < 1e-9);
            let back = flip_energy(&flipped, &gamma, &h, &p).unwrap();
            prop_assert!((incremental + back).abs() < 1e-9);
            let one = Site::new(0, 1);
            let single = single_flip_energy(&s, one, &h, &p).unwrap();
            let direct_one = energy(&s.with_flipped(&VertexSet::singleton(one)).unwrap(), &h, &p).unwrap()
                - energy(&s, &h, &p).unwrap();
            prop_assert!((single - direct_one).abs() < 1e-9);
        }
    }
}
