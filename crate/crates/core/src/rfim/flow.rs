//! Highest-label push-relabel on real capacities, used for the ground-state cut.
//! Only the preflow phase runs: the set of nodes that reach the sink in the
//! residual network of a maximum preflow is the same as for a maximum flow.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

pub(crate) struct FlowNetwork {
    nodes: usize,
    tails: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, tails: Vec::new(), to: Vec::new(), cap: Vec::new() }
    }

    /// Arc `u -> v` with capacity `c` and a reverse arc with capacity `back`.
    pub fn add_edge(&mut self, u: usize, v: usize, c: f64, back: f64) {
        debug_assert!(c >= 0.0 && back >= 0.0);
        self.tails.push(u);
        self.to.push(v);
        self.cap.push(c);
        self.tails.push(v);
        self.to.push(u);
        self.cap.push(back);
    }

    pub fn solve(self, s: usize, t: usize) -> Residual {
        let mut pr = PushRelabel::build(self);
        pr.run(s, t);
        Residual { net: pr, t }
    }
}

struct PushRelabel {
    start: Vec<usize>,
    arcs: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
    height: Vec<usize>,
    excess: Vec<f64>,
    current: Vec<usize>,
    /// Active nodes by height; entries may be stale.
    active: Vec<Vec<usize>>,
    /// Doubly linked lists of all nodes below height `n`, by height.
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    max_height: usize,
    eps: f64,
}

impl PushRelabel {
    fn build(net: FlowNetwork) -> Self {
        let n = net.nodes;
        let mut start = vec![0usize; n + 1];
        for &u in &net.tails {
            start[u + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut arcs = vec![0usize; net.tails.len()];
        for (a, &u) in net.tails.iter().enumerate() {
            arcs[fill[u]] = a;
            fill[u] += 1;
        }
        let max_cap = net.cap.iter().cloned().fold(0.0, f64::max);
        PushRelabel {
            current: start[..n].to_vec(),
            start,
            arcs,
            to: net.to,
            cap: net.cap,
            height: vec![n; n],
            excess: vec![0.0; n],
            active: vec![Vec::new(); n],
            head: vec![NIL; n],
            next: vec![NIL; n],
            prev: vec![NIL; n],
            max_height: 0,
            eps: 1e-12 * max_cap.max(1.0),
        }
    }

    fn n(&self) -> usize {
        self.height.len()
    }

    fn link(&mut self, u: usize) {
        let h = self.height[u];
        self.prev[u] = NIL;
        self.next[u] = self.head[h];
        if self.head[h] != NIL {
            self.prev[self.head[h]] = u;
        }
        self.head[h] = u;
        self.max_height = self.max_height.max(h);
    }

    fn unlink(&mut self, u: usize) {
        let h = self.height[u];
        if self.prev[u] != NIL {
            self.next[self.prev[u]] = self.next[u];
        } else {
            self.head[h] = self.next[u];
        }
        if self.next[u] != NIL {
            self.prev[self.next[u]] = self.prev[u];
        }
    }

    /// Exact distances to the sink; nodes that cannot reach it get height `n`.
    fn global_relabel(&mut self, s: usize, t: usize) {
        let n = self.n();
        self.height.iter_mut().for_each(|h| *h = n);
        self.head.iter_mut().for_each(|h| *h = NIL);
        self.active.iter_mut().for_each(Vec::clear);
        self.max_height = 0;
        self.height[t] = 0;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            if v != t {
                self.link(v);
                self.current[v] = self.start[v];
                if self.excess[v] > self.eps {
                    self.active[self.height[v]].push(v);
                }
            }
            for i in self.start[v]..self.start[v + 1] {
                let a = self.arcs[i];
                let u = self.to[a];
                if u != s && self.height[u] == n && self.cap[a ^ 1] > self.eps {
                    self.height[u] = self.height[v] + 1;
                    queue.push_back(u);
                }
            }
        }
    }

    /// Lifts every node above the emptied height `h` to `n`.
    fn gap(&mut self, h: usize) {
        let n = self.n();
        for level in h + 1..=self.max_height {
            let mut u = self.head[level];
            while u != NIL {
                self.height[u] = n;
                u = self.next[u];
            }
            self.head[level] = NIL;
            self.active[level].clear();
        }
        self.max_height = h.saturating_sub(1);
    }

    fn run(&mut self, s: usize, t: usize) {
        let n = self.n();
        for i in self.start[s]..self.start[s + 1] {
            let a = self.arcs[i];
            let c = self.cap[a];
            if c > 0.0 {
                self.cap[a] = 0.0;
                self.cap[a ^ 1] += c;
                self.excess[self.to[a]] += c;
            }
        }
        self.global_relabel(s, t);
        let mut top = n;
        let mut work = 0usize;
        let budget = 20 * n + self.arcs.len();
        loop {
            while top > 0 && self.active[top - 1].is_empty() {
                top -= 1;
            }
            if top == 0 {
                break;
            }
            let u = self.active[top - 1].pop().expect("non-empty");
            if self.height[u] != top - 1 || self.excess[u] <= self.eps {
                continue;
            }
            self.discharge(u, s, t, &mut top, &mut work);
            if work > budget {
                work = 0;
                self.global_relabel(s, t);
                top = n;
            }
        }
    }

    fn discharge(&mut self, u: usize, s: usize, t: usize, top: &mut usize, work: &mut usize) {
        let n = self.n();
        while self.excess[u] > self.eps {
            if self.current[u] == self.start[u + 1] {
                let mut h = n;
                for &a in &self.arcs[self.start[u]..self.start[u + 1]] {
                    if self.cap[a] > self.eps {
                        h = h.min(self.height[self.to[a]] + 1);
                    }
                }
                *work += 12 + self.start[u + 1] - self.start[u];
                self.current[u] = self.start[u];
                let old = self.height[u];
                self.unlink(u);
                if self.head[old] == NIL {
                    self.height[u] = n;
                    self.gap(old);
                    return;
                }
                self.height[u] = h.min(n);
                if self.height[u] >= n {
                    return;
                }
                self.link(u);
                continue;
            }
            let a = self.arcs[self.current[u]];
            let v = self.to[a];
            if self.cap[a] > self.eps && self.height[u] == self.height[v] + 1 {
                let push = self.excess[u].min(self.cap[a]);
                self.cap[a] -= push;
                self.cap[a ^ 1] += push;
                self.excess[u] -= push;
                let was_idle = self.excess[v] <= self.eps;
                self.excess[v] += push;
                if was_idle && v != s && v != t && self.excess[v] > self.eps {
                    self.active[self.height[v]].push(v);
                    *top = (*top).max(self.height[v] + 1);
                }
            } else {
                self.current[u] += 1;
            }
        }
    }
}

pub(crate) struct Residual {
    net: PushRelabel,
    t: usize,
}

impl Residual {
    #[cfg(test)]
    pub fn value(&self) -> f64 {
        self.net.excess[self.t]
    }

    /// Nodes from which the sink is reachable in the residual network. Their
    /// complement is the largest source side over all minimum cuts.
    pub fn reaches_sink(&self) -> Vec<bool> {
        let d = &self.net;
        let mut seen = vec![false; d.height.len()];
        seen[self.t] = true;
        let mut queue = VecDeque::from([self.t]);
        while let Some(v) = queue.pop_front() {
            for &a in &d.arcs[d.start[v]..d.start[v + 1]] {
                let u = d.to[a];
                if !seen[u] && d.cap[a ^ 1] > d.eps {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn textbook_network() {
        // CLRS figure 26.1, max flow 23.
        let mut n = FlowNetwork::new(6);
        for (u, v, c) in [(0, 1, 16.0), (0, 2, 13.0), (1, 3, 12.0), (2, 1, 4.0), (2, 4, 14.0), (3, 2, 9.0), (3, 5, 20.0), (4, 3, 7.0), (4, 5, 4.0)] {
            n.add_edge(u, v, c, 0.0);
        }
        assert!((n.solve(0, 5).value() - 23.0).abs() < 1e-12);
    }

    /// Min cut by enumerating every source side.
    fn brute_min_cut(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (n - 2)) {
            let side = |v: usize| v == 0 || (v != n - 1 && mask >> (v - 1) & 1 == 1);
            let cut: f64 = edges.iter().filter(|(u, v, _)| side(*u) && !side(*v)).map(|e| e.2).sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn random_networks_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(3..9);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random::<f64>() < 0.4 {
                        edges.push((u, v, rng.random_range(0.0..5.0)));
                    }
                }
            }
            let mut net = FlowNetwork::new(n);
            for &(u, v, c) in &edges {
                net.add_edge(u, v, c, 0.0);
            }
            let res = net.solve(0, n - 1);
            let brute = brute_min_cut(n, &edges);
            assert!((res.value() - brute).abs() < 1e-9, "{} vs {}", res.value(), brute);
            // The residual source side is itself a minimum cut.
            let reach = res.reaches_sink();
            assert!(!reach[0]);
            let cut: f64 = edges.iter().filter(|(u, v, _)| !reach[*u] && reach[*v]).map(|e| e.2).sum();
            assert!((cut - brute).abs() < 1e-9);
        }
    }
}
