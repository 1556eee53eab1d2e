use super::flow::FlowNetwork;
use super::{energy, Boundary, ModelParams, RandomField, RfimError, SpinConfiguration};

/// Exact minimizer of `H` on the field's box, by minimum cut. Plus spins are
/// the source side. Couplings to the frozen boundary are folded into the
/// single-site term, so the network has no infinite arcs. Among degenerate
/// minimizers the pointwise-maximal one is returned.
pub fn ground_state(h: &RandomField, p: &ModelParams, boundary: Boundary) -> SpinConfiguration {
    let domain = h.domain();
    let n = domain.vertex_count();
    let (s, t) = (n, n + 1);
    let bc = f64::from(boundary.sign());
    let pair = 2.0 * p.coupling;
    let mut net = FlowNetwork::new(n + 2);
    for (i, site) in domain.sites().enumerate() {
        let b = p.site_field(h.values()[i]) + p.coupling * bc * f64::from(domain.outward_edges(site));
        if b > 0.0 {
            net.add_edge(s, i, 2.0 * b, 0.0);
        } else if b < 0.0 {
            net.add_edge(i, t, -2.0 * b, 0.0);
        }
        for nb in [site.offset(1, 0), site.offset(0, 1)] {
            if let Some(j) = domain.index(nb) {
                net.add_edge(i, j, pair, pair);
            }
        }
    }
    let reach = net.solve(s, t).reaches_sink();
    let spins = (0..n).map(|i| if reach[i] { -1 } else { 1 }).collect();
    SpinConfiguration::from_spins(domain, boundary, spins).expect("cut assigns ±1")
}

/// `(σ⁺, σ⁻)` for one field.
pub fn ground_state_pair(h: &RandomField, p: &ModelParams) -> (SpinConfiguration, SpinConfiguration) {
    (ground_state(h, p, Boundary::Plus), ground_state(h, p, Boundary::Minus))
}

/// Boxes up to this many sites are accepted by [`exhaustive_ground_energy`].
pub const EXHAUSTIVE_MAX_SITES: usize = 20;

/// Minimum of `H` over all `2^n` configurations, by enumeration.
pub fn exhaustive_ground_energy(h: &RandomField, p: &ModelParams, boundary: Boundary) -> Result<f64, RfimError> {
    let domain = h.domain();
    let n = domain.vertex_count();
    if n > EXHAUSTIVE_MAX_SITES {
        return Err(RfimError::InvalidParams(format!("{n} sites exceed the exhaustive limit {EXHAUSTIVE_MAX_SITES}")));
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let spins = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
        let sigma = SpinConfiguration::from_spins(domain, boundary, spins)?;
        best = best.min(energy(&sigma, h, p)?);
    }
    Ok(best)
}
