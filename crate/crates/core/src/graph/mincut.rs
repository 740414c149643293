//! Minimum weight station separators via max-flow on the node-split graph.

use std::collections::VecDeque;

use super::dijkstra::DijkstraCounter;
use super::separator::{minimalize_local, TimeSeparator};
use crate::network::OdSubgraph;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
}

/// Dinic max-flow on `f64` capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<usize>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = usize::MAX);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap } = self.edges[e];
                if cap > EPS && self.level[to] == usize::MAX {
                    self.level[to] = self.level[v] + 1;
                    queue.push_back(to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.iter[v] < self.adj[v].len() {
            let e = self.adj[v][self.iter[v]];
            let Edge { to, cap } = self.edges[e];
            if cap > EPS && self.level[to] == self.level[v].wrapping_add(1) {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > EPS {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.iter[v] += 1;
        }
        0.0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] == usize::MAX {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                if f.is_infinite() {
                    return f64::INFINITY;
                }
                flow += f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap } = self.edges[e];
                if cap > EPS && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    }
}

/// Minimum `weights`-weight separator of the subgraph, minimalized as a
/// time-separator. `weights` is indexed by local node; only stations are
/// read. Returns `None` when no station set separates the pair (direct arc).
pub fn fractional_separator_mincut(
    sub: &OdSubgraph,
    weights: &[f64],
    counter: &DijkstraCounter,
) -> Option<(TimeSeparator, f64)> {
    if sub.is_empty() {
        return None;
    }
    let n = sub.node_count();
    let (s, t) = (sub.source(), sub.target());
    // node i splits into 2i (in) and 2i + 1 (out)
    let mut net = FlowNetwork::new(2 * n);
    for (i, &w) in weights.iter().enumerate().take(n) {
        let cap = if sub.is_station(i) { w.max(0.0) } else { f64::INFINITY };
        net.add_edge(2 * i, 2 * i + 1, cap);
    }
    for arc in sub.arcs() {
        net.add_edge(2 * arc.tail + 1, 2 * arc.head, f64::INFINITY);
    }
    let flow = net.max_flow(2 * s, 2 * t + 1);
    if !flow.is_finite() {
        return None;
    }
    let side = net.source_side(2 * s);
    let cut: Vec<usize> = sub.stations().filter(|&i| side[2 * i] && !side[2 * i + 1]).collect();
    let minimal = minimalize_local(sub, &cut, counter);
    let weight = minimal.iter().map(|&i| weights[i]).sum();
    Some((TimeSeparator::from_local(sub, &minimal), weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;
    use crate::network::{build_od_subgraph, DEFAULT_TIME_TOL};

    fn weights(sub: &OdSubgraph, vals: &[(usize, f64)]) -> Vec<f64> {
        let mut w = vec![0.0; sub.node_count()];
        for &(v, x) in vals {
            if let Some(i) = sub.local(v) {
                w[i] = x;
            }
        }
        w
    }

    #[test]
    fn example_network_violated_cut() {
        let fx = example_network(10.0, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        let w = weights(&sub, &[(fx.a, 0.3), (fx.b, 0.4), (fx.c, 0.0), (fx.d, 0.2)]);
        let counter = DijkstraCounter::default();
        let (sep, weight) = fractional_separator_mincut(&sub, &w, &counter).unwrap();
        assert_eq!(sep.stations, vec![fx.b, fx.c, fx.d]);
        assert!((weight - 0.6).abs() < 1e-12);
    }

    #[test]
    fn example_network_tight_bound_drops_c() {
        let fx = example_network(5.0, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        let w = weights(&sub, &[(fx.a, 0.3), (fx.b, 0.4), (fx.d, 0.2)]);
        let counter = DijkstraCounter::default();
        let (sep, weight) = fractional_separator_mincut(&sub, &w, &counter).unwrap();
        assert_eq!(sep.stations, vec![fx.b, fx.d]);
        assert!((weight - 0.6).abs() < 1e-12);
    }

    #[test]
    fn example_network_no_violation() {
        let fx = example_network(10.0, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        let counter = DijkstraCounter::default();
        let w = weights(&sub, &[(fx.a, 0.5), (fx.b, 0.5), (fx.c, 0.0), (fx.d, 0.5)]);
        let (_, weight) = fractional_separator_mincut(&sub, &w, &counter).unwrap();
        assert!((weight - 1.0).abs() < 1e-12);
        let ones = vec![1.0; sub.node_count()];
        let (_, weight) = fractional_separator_mincut(&sub, &ones, &counter).unwrap();
        assert!(weight >= 1.0);
    }
}
