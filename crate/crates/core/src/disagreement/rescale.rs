use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::lattice::{Site, VertexSet};
use crate::tortuosity::{CurveSystem, PolygonalCurve};

use super::{DisagreementError, DisagreementSet};

/// Half-width of the window holding rescaled curves.
pub const RESCALED_HALF_WIDTH: f64 = 7.0;

/// `v ↦ 4v/ℓ`, which sends `Λ(2ℓ) \ Λ(ℓ)` onto the annulus between sup-norm 4 and 8.
pub fn rescale_site(v: Site, ell: u32) -> [f64; 2] {
    let k = 4.0 / f64::from(ell);
    [k * f64::from(v.x), k * f64::from(v.y)]
}

/// `5 <= 4|v|∞/ℓ <= 7`.
pub fn clip_region_contains(v: Site, ell: u32) -> bool {
    let n = 4 * u64::from(v.sup_norm());
    n >= 5 * u64::from(ell) && n <= 7 * u64::from(ell)
}

fn bfs_tree(cluster: &VertexSet, root: Site) -> HashMap<Site, Site> {
    let mut parent = HashMap::from([(root, root)]);
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        for n in s.neighbors() {
            if cluster.contains(n) && !parent.contains_key(&n) {
                parent.insert(n, s);
                queue.push_back(n);
            }
        }
    }
    parent
}

fn path_to(parent: &HashMap<Site, Site>, target: Site) -> Vec<Site> {
    let mut path = vec![target];
    let mut at = target;
    while parent[&at] != at {
        at = parent[&at];
        path.push(at);
    }
    path.reverse();
    path
}

/// Contact points of a cluster: sites next to the edge of the clip region,
/// and tips (at most one neighbour in the cluster). Adjacent contacts form a
/// group, represented by its least site.
fn representatives(cluster: &VertexSet, ell: u32) -> Vec<Site> {
    let contacts: VertexSet = cluster
        .iter()
        .filter(|&s| {
            let nbrs = s.neighbors();
            nbrs.iter().any(|&n| !clip_region_contains(n, ell))
                || nbrs.iter().filter(|&&n| cluster.contains(n)).count() <= 1
        })
        .collect();
    let mut reps: Vec<Site> = contacts.connected_components().iter().filter_map(|g| g.sorted_sites().first().copied()).collect();
    reps.sort();
    if reps.is_empty() {
        reps.extend(cluster.sorted_sites().first().copied());
    }
    reps
}

/// Curve system for the disagreement set clipped to `5 <= 4|v|∞/ℓ <= 7`:
/// for each connected piece, shortest lattice paths between its contact
/// groups (or from the single group to the farthest site), rescaled by `4/ℓ`.
pub fn rescale_to_curve_system(d: &DisagreementSet, ell: u32) -> Result<CurveSystem, DisagreementError> {
    if ell == 0 {
        return Err(DisagreementError::InvalidParams("ℓ must be positive".into()));
    }
    let step = 4.0 / f64::from(ell);
    let clipped: VertexSet = d.members.iter().filter(|&s| clip_region_contains(s, ell)).collect();
    let mut seen: BTreeSet<Vec<Site>> = BTreeSet::new();
    let mut curves = Vec::new();
    for cluster in clipped.connected_components() {
        if cluster.len() < 2 {
            continue;
        }
        let reps = representatives(&cluster, ell);
        let mut paths = Vec::new();
        if reps.len() == 1 {
            let parent = bfs_tree(&cluster, reps[0]);
            let far = cluster.sorted_sites().into_iter().max_by_key(|s| path_to(&parent, *s).len()).expect("non-empty");
            paths.push(path_to(&parent, far));
        } else {
            for (i, &a) in reps.iter().enumerate() {
                let parent = bfs_tree(&cluster, a);
                for &b in &reps[i + 1..] {
                    paths.push(path_to(&parent, b));
                }
            }
        }
        for path in paths {
            let mut rev = path.clone();
            rev.reverse();
            let key = path.clone().min(rev);
            if path.len() >= 2 && seen.insert(key) {
                let c = PolygonalCurve::from_lattice_path(&path, step)
                    .map_err(|e| DisagreementError::InvalidParams(e.to_string()))?;
                curves.push(c);
            }
        }
    }
    let w = RESCALED_HALF_WIDTH;
    CurveSystem::new(curves, step, (vec![-w, -w], vec![w, w])).map_err(|e| DisagreementError::InvalidParams(e.to_string()))
}
