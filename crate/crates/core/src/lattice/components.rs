use std::collections::VecDeque;

use super::{Site, VertexSet};
use crate::rfim::SpinConfiguration;

/// A maximal connected constant-sign subset of a spin configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub sites: VertexSet,
    pub sign: i8,
}

fn flood(sigma: &SpinConfiguration, start: usize, seen: &mut [bool]) -> Component {
    let domain = sigma.domain();
    let sign = sigma.spins()[start];
    let mut members = vec![domain.site(start)];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for n in domain.site(i).neighbors() {
            if let Some(j) = domain.index(n) {
                if !seen[j] && sigma.spins()[j] == sign {
                    seen[j] = true;
                    members.push(n);
                    queue.push_back(j);
                }
            }
        }
    }
    Component { sites: VertexSet::from_sites(members), sign }
}

/// Partition of the box into maximal connected constant-sign sets, ordered by
/// their first site in row-major order.
pub fn constant_sign_components(sigma: &SpinConfiguration) -> Vec<Component> {
    let mut seen = vec![false; sigma.spins().len()];
    let mut out = Vec::new();
    for i in 0..seen.len() {
        if !seen[i] {
            out.push(flood(sigma, i, &mut seen));
        }
    }
    out
}

pub fn component_containing(sigma: &SpinConfiguration, site: Site) -> Option<Component> {
    let i = sigma.domain().index(site)?;
    let mut seen = vec![false; sigma.spins().len()];
    Some(flood(sigma, i, &mut seen))
}

/// Descends from the component of the origin into holes until it reaches a
/// simply connected component. Every edge of its boundary that stays inside
/// the box joins opposite spins.
///
/// Each step moves to a component lying strictly inside a hole of the
/// previous one, so the enclosed region shrinks and the loop terminates.
pub fn hole_descent(sigma: &SpinConfiguration) -> Component {
    let mut current = component_containing(sigma, Site::ORIGIN).expect("origin lies in every box");
    loop {
        match current.sites.enclosed_sites().first() {
            None => return current,
            Some(&hole) => {
                current = component_containing(sigma, hole).expect("holes of a box subset lie in the box");
            }
        }
    }
}
