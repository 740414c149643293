//! Expanded refueling network, per-pair time-feasible subgraphs and
//! end-to-end solution verification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::dijkstra::{dijkstra, Digraph, DijkstraCounter, Direction};
use crate::instance::Instance;

/// Dense node index into a [`NetworkGraph`].
pub type NodeId = usize;

/// Default absolute tolerance for comparisons against time bounds.
pub const DEFAULT_TIME_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("arc {tail}->{head} is a self-loop")]
    SelfLoop { tail: NodeId, head: NodeId },
    #[error("parallel arcs between {tail} and {head}")]
    ParallelArc { tail: NodeId, head: NodeId },
    #[error("arc {tail}->{head} references an unknown node")]
    UnknownNode { tail: NodeId, head: NodeId },
    #[error("arc {tail}->{head} has invalid {field} {value}")]
    InvalidArcValue {
        tail: NodeId,
        head: NodeId,
        field: &'static str,
        value: f64,
    },
    #[error("invalid range parameters: {0}")]
    InvalidRanges(String),
    #[error("duplicate node label {0}")]
    DuplicateLabel(u64),
    #[error("invalid refuel surcharge: {0}")]
    InvalidSurcharge(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Terminal,
    Station,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub tau: f64,
    pub ell: f64,
}

/// Fastest road connection between two candidate sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub tau: f64,
    pub ell: f64,
}

/// Vehicle range parameters: maximum range, range available at origins and
/// range required at destinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeParams {
    pub r_max: f64,
    pub rho_orig: f64,
    pub rho_dest: f64,
}

impl RangeParams {
    /// Origins start half full and destinations must be reached half full.
    pub fn half_capacity(r_max: f64) -> Self {
        RangeParams {
            r_max,
            rho_orig: r_max / 2.0,
            rho_dest: r_max / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let ok = self.rho_orig > 0.0
            && self.rho_orig <= self.rho_dest
            && self.rho_dest <= self.r_max
            && self.r_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(NetworkError::InvalidRanges(format!(
                "need 0 < rho_orig <= rho_dest <= r_max, got {:?}",
                self
            )))
        }
    }

    /// Largest distance a range-feasible connection from a `from` node to a
    /// `to` node may have.
    pub fn distance_bound(&self, from: NodeRole, to: NodeRole) -> f64 {
        match (from, to) {
            (NodeRole::Station, NodeRole::Station) => self.r_max,
            (NodeRole::Station, NodeRole::Terminal) => self.r_max - self.rho_dest,
            (NodeRole::Terminal, NodeRole::Station) => self.rho_orig,
            (NodeRole::Terminal, NodeRole::Terminal) => self.rho_orig - self.rho_dest,
        }
    }
}

/// Directed expanded network. Nodes carry an external label (the id used in
/// files) and a role; arcs are indexed densely.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    labels: Vec<u64>,
    roles: Vec<NodeRole>,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl NetworkGraph {
    pub fn new(nodes: Vec<(u64, NodeRole)>, arcs: Vec<Arc>) -> Result<Self, NetworkError> {
        let n = nodes.len();
        let mut seen_labels = BTreeSet::new();
        for &(label, _) in &nodes {
            if !seen_labels.insert(label) {
                return Err(NetworkError::DuplicateLabel(label));
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut pairs = BTreeSet::new();
        for (idx, arc) in arcs.iter().enumerate() {
            let (tail, head) = (arc.tail, arc.head);
            if tail >= n || head >= n {
                return Err(NetworkError::UnknownNode { tail, head });
            }
            if tail == head {
                return Err(NetworkError::SelfLoop { tail, head });
            }
            for (field, value) in [("tau", arc.tau), ("ell", arc.ell)] {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(NetworkError::InvalidArcValue {
                        tail,
                        head,
                        field,
                        value,
                    });
                }
            }
            if !pairs.insert((tail, head)) {
                return Err(NetworkError::ParallelArc { tail, head });
            }
            out_adj[tail].push(idx);
            in_adj[head].push(idx);
        }
        let (labels, roles) = nodes.into_iter().unzip();
        Ok(NetworkGraph {
            labels,
            roles,
            arcs,
            out_adj,
            in_adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn role(&self, v: NodeId) -> NodeRole {
        self.roles[v]
    }

    pub fn is_station(&self, v: NodeId) -> bool {
        self.roles[v] == NodeRole::Station
    }

    pub fn label(&self, v: NodeId) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn node_by_label(&self, label: u64) -> Option<NodeId> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn stations(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&v| self.is_station(v))
    }

    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&v| !self.is_station(v))
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &Arc {
        &self.arcs[idx]
    }

    pub fn out_arcs(&self, v: NodeId) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_arcs(&self, v: NodeId) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn find_arc(&self, tail: NodeId, head: NodeId) -> Option<usize> {
        self.out_adj
            .get(tail)?
            .iter()
            .copied()
            .find(|&a| self.arcs[a].head == head)
    }

    /// Triples `(u, v, w)` where the direct arc `u -> w` is slower than the
    /// two-arc detour through `v` by more than `tol`.
    pub fn triangle_violations(&self, tol: f64) -> Vec<(NodeId, NodeId, NodeId)> {
        let mut out = Vec::new();
        for direct in &self.arcs {
            let (u, w) = (direct.tail, direct.head);
            for &a in &self.out_adj[u] {
                let first = &self.arcs[a];
                if let Some(b) = self.find_arc(first.head, w) {
                    if first.tau + self.arcs[b].tau < direct.tau - tol {
                        out.push((u, first.head, w));
                    }
                }
            }
        }
        out
    }
}

impl Digraph for NetworkGraph {
    fn node_count(&self) -> usize {
        self.roles.len()
    }

    fn visit_arcs(&self, v: usize, dir: Direction, f: &mut dyn FnMut(usize, usize, f64)) {
        match dir {
            Direction::Forward => {
                for &a in &self.out_adj[v] {
                    let arc = &self.arcs[a];
                    f(arc.head, a, arc.tau);
                }
            }
            Direction::Backward => {
                for &a in &self.in_adj[v] {
                    let arc = &self.arcs[a];
                    f(arc.tail, a, arc.tau);
                }
            }
        }
    }
}

/// Builds the expanded graph from candidate sites and a pairwise connection
/// table: an arc is kept iff its distance respects the role-dependent range
/// bound (inclusive).
pub fn build_expanded_graph(
    nodes: &[(u64, NodeRole)],
    table: &[Vec<Option<Connection>>],
    ranges: &RangeParams,
) -> Result<NetworkGraph, NetworkError> {
    ranges.validate()?;
    let mut arcs = Vec::new();
    for (u, row) in table.iter().enumerate() {
        for (v, conn) in row.iter().enumerate() {
            let Some(conn) = conn else { continue };
            if u == v {
                continue;
            }
            for (field, value) in [("tau", conn.tau), ("ell", conn.ell)] {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(NetworkError::InvalidArcValue {
                        tail: u,
                        head: v,
                        field,
                        value,
                    });
                }
            }
            let (ru, rv) = (nodes[u].1, nodes[v].1);
            if conn.ell <= ranges.distance_bound(ru, rv) {
                arcs.push(Arc {
                    tail: u,
                    head: v,
                    tau: conn.tau,
                    ell: conn.ell,
                });
            }
        }
    }
    NetworkGraph::new(nodes.to_vec(), arcs)
}

/// Adds `full_refuel_time * ell / r_max` to the transit time of every arc
/// ending in a station.
pub fn apply_refuel_surcharge(
    graph: &NetworkGraph,
    full_refuel_time: f64,
    r_max: f64,
) -> Result<NetworkGraph, NetworkError> {
    if !(r_max > 0.0) {
        return Err(NetworkError::InvalidSurcharge(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    if !(full_refuel_time >= 0.0) {
        return Err(NetworkError::InvalidSurcharge(format!(
            "refuel time must be nonnegative, got {full_refuel_time}"
        )));
    }
    let mut out = graph.clone();
    for arc in &mut out.arcs {
        if graph.is_station(arc.head) {
            arc.tau += full_refuel_time * arc.ell / r_max;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdPair {
    pub origin: NodeId,
    pub dest: NodeId,
    pub demand: f64,
    pub time_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubArc {
    pub tail: usize,
    pub head: usize,
    pub tau: f64,
    /// Index of the arc in the parent [`NetworkGraph`].
    pub arc: usize,
}

/// Restriction of the network to the nodes and arcs that lie on some
/// time-feasible walk of one OD pair. Nodes are re-indexed locally; the
/// interior consists of stations only.
#[derive(Debug, Clone)]
pub struct OdSubgraph {
    pub pair: usize,
    pub time_bound: f64,
    pub tol: f64,
    nodes: Vec<NodeId>,
    station: Vec<bool>,
    arcs: Vec<SubArc>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    from_source: Vec<f64>,
    to_target: Vec<f64>,
    endpoints: Option<(usize, usize)>,
}

impl OdSubgraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn source(&self) -> usize {
        self.endpoints.expect("empty subgraph has no source").0
    }

    pub fn target(&self) -> usize {
        self.endpoints.expect("empty subgraph has no target").1
    }

    /// Global id of local node `i`.
    pub fn global(&self, i: usize) -> NodeId {
        self.nodes[i]
    }

    pub fn globals(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn local(&self, v: NodeId) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    pub fn is_station(&self, i: usize) -> bool {
        self.station[i]
    }

    /// Local indexes of the stations in the subgraph.
    pub fn stations(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.station[i])
    }

    pub fn arcs(&self) -> &[SubArc] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> &SubArc {
        &self.arcs[a]
    }

    pub fn out_arcs(&self, i: usize) -> &[usize] {
        &self.out_adj[i]
    }

    pub fn in_arcs(&self, i: usize) -> &[usize] {
        &self.in_adj[i]
    }

    pub fn find_arc(&self, tail: usize, head: usize) -> Option<usize> {
        self.out_adj[tail].iter().copied().find(|&a| self.arcs[a].head == head)
    }

    /// Shortest time from the origin to local node `i` in the network.
    pub fn time_from_source(&self, i: usize) -> f64 {
        self.from_source[i]
    }

    /// Shortest time from local node `i` to the destination in the network.
    pub fn time_to_target(&self, i: usize) -> f64 {
        self.to_target[i]
    }

    pub fn within_bound(&self, time: f64) -> bool {
        time <= self.time_bound + self.tol
    }

    /// Sum of arc times along a local node sequence, `None` if some
    /// consecutive pair is not an arc of the subgraph.
    pub fn path_time(&self, path: &[usize]) -> Option<f64> {
        path.windows(2)
            .map(|w| self.find_arc(w[0], w[1]).map(|a| self.arcs[a].tau))
            .sum()
    }

    pub fn to_global_path(&self, path: &[usize]) -> Vec<NodeId> {
        path.iter().map(|&i| self.nodes[i]).collect()
    }
}

impl Digraph for OdSubgraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn visit_arcs(&self, v: usize, dir: Direction, f: &mut dyn FnMut(usize, usize, f64)) {
        match dir {
            Direction::Forward => {
                for &a in &self.out_adj[v] {
                    let arc = &self.arcs[a];
                    f(arc.head, a, arc.tau);
                }
            }
            Direction::Backward => {
                for &a in &self.in_adj[v] {
                    let arc = &self.arcs[a];
                    f(arc.tail, a, arc.tau);
                }
            }
        }
    }
}

/// Shortest-time labels from `origin` and to `dest`, where only stations and
/// the two endpoints may be traversed.
fn endpoint_labels(graph: &NetworkGraph, origin: NodeId, dest: NodeId) -> (Vec<f64>, Vec<f64>) {
    let counter = DijkstraCounter::default();
    let allowed = |v: NodeId| v == origin || v == dest || graph.is_station(v);
    let weight = |a: usize| {
        let arc = graph.arc(a);
        (allowed(arc.tail) && allowed(arc.head)).then_some(arc.tau)
    };
    let fwd = dijkstra(graph, origin, Direction::Forward, weight, &counter);
    let bwd = dijkstra(graph, dest, Direction::Backward, weight, &counter);
    (fwd.dist, bwd.dist)
}

/// Shortest transit time from the pair's origin to its destination, only
/// passing through stations.
pub fn shortest_pair_time(graph: &NetworkGraph, pair: &OdPair) -> f64 {
    endpoint_labels(graph, pair.origin, pair.dest).0[pair.dest]
}

pub fn build_od_subgraph(graph: &NetworkGraph, index: usize, pair: &OdPair, tol: f64) -> OdSubgraph {
    let (s, t) = (pair.origin, pair.dest);
    let (from_s, to_t) = endpoint_labels(graph, s, t);
    let u = pair.time_bound;
    let eligible = |v: NodeId| v == s || v == t || graph.is_station(v);
    let nodes: Vec<NodeId> = (0..graph.node_count())
        .filter(|&v| eligible(v) && from_s[v] + to_t[v] <= u + tol)
        .collect();
    let mut local = vec![usize::MAX; graph.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let mut arcs = Vec::new();
    let mut out_adj = vec![Vec::new(); nodes.len()];
    let mut in_adj = vec![Vec::new(); nodes.len()];
    for (idx, arc) in graph.arcs().iter().enumerate() {
        let (i, j) = (local[arc.tail], local[arc.head]);
        if i == usize::MAX || j == usize::MAX {
            continue;
        }
        if from_s[arc.tail] + arc.tau + to_t[arc.head] <= u + tol {
            out_adj[i].push(arcs.len());
            in_adj[j].push(arcs.len());
            arcs.push(SubArc {
                tail: i,
                head: j,
                tau: arc.tau,
                arc: idx,
            });
        }
    }
    let endpoints = if nodes.is_empty() {
        None
    } else {
        Some((local[s], local[t]))
    };
    OdSubgraph {
        pair: index,
        time_bound: u,
        tol,
        station: nodes.iter().map(|&v| graph.is_station(v)).collect(),
        from_source: nodes.iter().map(|&v| from_s[v]).collect(),
        to_target: nodes.iter().map(|&v| to_t[v]).collect(),
        nodes,
        arcs,
        out_adj,
        in_adj,
        endpoints,
    }
}

/// A station set together with one route per OD pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub open: BTreeSet<NodeId>,
    pub routes: Vec<Vec<NodeId>>,
    pub objective: f64,
    /// Flow routed through each open station.
    pub load: BTreeMap<NodeId, f64>,
}

impl Solution {
    /// Assembles a solution; objective and loads are derived from the data.
    pub fn new(instance: &Instance, open: BTreeSet<NodeId>, routes: Vec<Vec<NodeId>>) -> Self {
        let objective = open.iter().fold(0.0, |acc, &v| acc + instance.cost[v]);
        let load = route_loads(instance, &routes)
            .into_iter()
            .filter(|(v, _)| open.contains(v))
            .collect();
        Solution {
            open,
            routes,
            objective,
            load,
        }
    }

    /// Mean of `load / capacity` over open stations with finite capacity.
    pub fn mean_utilization(&self, instance: &Instance) -> f64 {
        let ratios: Vec<f64> = self
            .open
            .iter()
            .filter(|&&v| instance.capacity[v].is_finite() && instance.capacity[v] > 0.0)
            .map(|&v| self.load.get(&v).copied().unwrap_or(0.0) / instance.capacity[v])
            .collect();
        if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        }
    }
}

fn route_loads(instance: &Instance, routes: &[Vec<NodeId>]) -> BTreeMap<NodeId, f64> {
    let mut load = BTreeMap::new();
    for (q, route) in routes.iter().enumerate() {
        let Some(pair) = instance.pairs.get(q) else { continue };
        let interior = route.iter().skip(1).take(route.len().saturating_sub(2));
        for &v in interior.collect::<BTreeSet<_>>() {
            *load.entry(v).or_insert(0.0) += pair.demand;
        }
    }
    load
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RouteCount { expected: usize, found: usize },
    Endpoints { pair: usize },
    UnknownNode { pair: usize, node: NodeId },
    MissingArc { pair: usize, tail: NodeId, head: NodeId },
    ArcOutsideSubgraph { pair: usize, tail: NodeId, head: NodeId },
    InteriorNotStation { pair: usize, node: NodeId },
    ClosedStation { pair: usize, node: NodeId },
    RepeatedNode { pair: usize, node: NodeId },
    TimeExceeded { pair: usize, time: f64, bound: f64 },
    Capacity { station: NodeId, load: f64, capacity: f64 },
    Objective { claimed: f64, actual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RouteCount { expected, found } => {
                write!(f, "route count: expected {expected}, found {found}")
            }
            Violation::Endpoints { pair } => write!(f, "endpoints: pair {pair}"),
            Violation::UnknownNode { pair, node } => write!(f, "unknown node {node} on pair {pair}"),
            Violation::MissingArc { pair, tail, head } => {
                write!(f, "missing arc {tail}->{head} on pair {pair}")
            }
            Violation::ArcOutsideSubgraph { pair, tail, head } => {
                write!(f, "arc {tail}->{head} outside subgraph of pair {pair}")
            }
            Violation::InteriorNotStation { pair, node } => {
                write!(f, "interior node {node} of pair {pair} is not a station")
            }
            Violation::ClosedStation { pair, node } => {
                write!(f, "pair {pair} uses closed station {node}")
            }
            Violation::RepeatedNode { pair, node } => {
                write!(f, "pair {pair} revisits node {node}")
            }
            Violation::TimeExceeded { pair, time, bound } => {
                write!(f, "time: pair {pair} takes {time} > {bound}")
            }
            Violation::Capacity {
                station,
                load,
                capacity,
            } => write!(f, "capacity at {station}: load {load} > {capacity}"),
            Violation::Objective { claimed, actual } => {
                write!(f, "objective: claimed {claimed}, actual {actual}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks every route (endpoints, arcs, time bound, open interior stations,
/// subgraph membership) and every station load against its capacity.
pub fn verify_solution(instance: &Instance, solution: &Solution) -> Verdict {
    let graph = &instance.graph;
    let tol = instance.time_tol;
    let mut violations = Vec::new();
    if solution.routes.len() != instance.pairs.len() {
        violations.push(Violation::RouteCount {
            expected: instance.pairs.len(),
            found: solution.routes.len(),
        });
    }
    for (q, (pair, route)) in instance.pairs.iter().zip(&solution.routes).enumerate() {
        if let Some(&node) = route.iter().find(|&&v| v >= graph.node_count()) {
            violations.push(Violation::UnknownNode { pair: q, node });
            continue;
        }
        if route.len() < 2 || route[0] != pair.origin || route[route.len() - 1] != pair.dest {
            violations.push(Violation::Endpoints { pair: q });
            continue;
        }
        let mut seen = BTreeSet::new();
        for &v in route {
            if !seen.insert(v) {
                violations.push(Violation::RepeatedNode { pair: q, node: v });
            }
        }
        for &v in &route[1..route.len() - 1] {
            if !graph.is_station(v) {
                violations.push(Violation::InteriorNotStation { pair: q, node: v });
            } else if !solution.open.contains(&v) {
                violations.push(Violation::ClosedStation { pair: q, node: v });
            }
        }
        let mut time = 0.0;
        let mut arcs_ok = true;
        for w in route.windows(2) {
            match graph.find_arc(w[0], w[1]) {
                Some(a) => time += graph.arc(a).tau,
                None => {
                    violations.push(Violation::MissingArc {
                        pair: q,
                        tail: w[0],
                        head: w[1],
                    });
                    arcs_ok = false;
                }
            }
        }
        if !arcs_ok {
            continue;
        }
        if time > pair.time_bound + tol {
            violations.push(Violation::TimeExceeded {
                pair: q,
                time,
                bound: pair.time_bound,
            });
            continue;
        }
        let sub = build_od_subgraph(graph, q, pair, tol);
        for w in route.windows(2) {
            let inside = match (sub.local(w[0]), sub.local(w[1])) {
                (Some(i), Some(j)) => sub.find_arc(i, j).is_some(),
                _ => false,
            };
            if !inside {
                violations.push(Violation::ArcOutsideSubgraph {
                    pair: q,
                    tail: w[0],
                    head: w[1],
                });
            }
        }
    }
    for (v, load) in route_loads(instance, &solution.routes) {
        let cap = instance.capacity[v];
        if load > cap + 1e-9 {
            violations.push(Violation::Capacity {
                station: v,
                load,
                capacity: cap,
            });
        }
    }
    let actual: f64 = solution.open.iter().map(|&v| instance.cost[v]).sum();
    if (actual - solution.objective).abs() > 1e-6 {
        violations.push(Violation::Objective {
            claimed: solution.objective,
            actual,
        });
    }
    Verdict { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_graph, example_network, ExampleGraph};

    #[test]
    fn station_pair_at_max_range_is_kept() {
        let nodes = vec![(0, NodeRole::Station), (1, NodeRole::Station)];
        let ranges = RangeParams::half_capacity(100.0);
        let conn = Some(Connection { tau: 1.0, ell: 100.0 });
        let table = vec![vec![None, conn], vec![None, None]];
        let g = build_expanded_graph(&nodes, &table, &ranges).unwrap();
        assert_eq!(g.arc_count(), 1);
    }

    #[test]
    fn terminal_to_terminal_needs_zero_distance() {
        let nodes = vec![(0, NodeRole::Terminal), (1, NodeRole::Terminal)];
        let ranges = RangeParams::half_capacity(100.0);
        let table = vec![vec![None, Some(Connection { tau: 1.0, ell: 1e-6 })], vec![None, None]];
        let g = build_expanded_graph(&nodes, &table, &ranges).unwrap();
        assert_eq!(g.arc_count(), 0);
    }

    #[test]
    fn terminal_to_station_boundary() {
        let nodes = vec![(0, NodeRole::Terminal), (1, NodeRole::Station), (2, NodeRole::Station)];
        let ranges = RangeParams::half_capacity(100.0);
        let at = Some(Connection { tau: 1.0, ell: 50.0 });
        let over = Some(Connection {
            tau: 1.0,
            ell: 50.0 + 1e-9,
        });
        let table = vec![vec![None, at, over], vec![None; 3], vec![None; 3]];
        let g = build_expanded_graph(&nodes, &table, &ranges).unwrap();
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.arc(0).head, 1);
    }

    #[test]
    fn negative_distance_rejected() {
        let nodes = vec![(0, NodeRole::Station), (1, NodeRole::Station)];
        let table = vec![vec![None, Some(Connection { tau: 1.0, ell: -1.0 })], vec![None, None]];
        let err = build_expanded_graph(&nodes, &table, &RangeParams::half_capacity(10.0)).unwrap_err();
        assert!(matches!(err, NetworkError::InvalidArcValue { field: "ell", .. }));
    }

    #[test]
    fn parallel_and_self_loops_rejected() {
        let nodes = vec![(0, NodeRole::Station), (1, NodeRole::Station)];
        let arc = Arc {
            tail: 0,
            head: 1,
            tau: 1.0,
            ell: 1.0,
        };
        assert!(matches!(
            NetworkGraph::new(nodes.clone(), vec![arc, arc]),
            Err(NetworkError::ParallelArc { .. })
        ));
        let lp = Arc {
            tail: 1,
            head: 1,
            ..arc
        };
        assert!(matches!(
            NetworkGraph::new(nodes, vec![lp]),
            Err(NetworkError::SelfLoop { .. })
        ));
    }

    #[test]
    fn surcharge_only_on_station_heads() {
        let ExampleGraph { graph, a, d, t, s, .. } = example_graph();
        // ell equals tau on the example graph; s->a has ell 2
        let out = apply_refuel_surcharge(&graph, 30.0, 2.0).unwrap();
        let sa = out.find_arc(s, a).unwrap();
        assert_eq!(out.arc(sa).tau, 2.0 + 30.0);
        let dt = out.find_arc(d, t).unwrap();
        assert_eq!(out.arc(dt).tau, graph.arc(dt).tau);
        assert_eq!(apply_refuel_surcharge(&graph, 0.0, 2.0).unwrap(), graph);
        assert!(apply_refuel_surcharge(&graph, 30.0, 0.0).is_err());
    }

    #[test]
    fn example_network_subgraph_prunes_c() {
        let fx = example_network(5.0, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        let nodes: Vec<_> = sub.globals().to_vec();
        assert_eq!(nodes, vec![fx.s, fx.a, fx.b, fx.d, fx.t]);
        let g = &fx.instance.graph;
        let kept: BTreeSet<_> = sub
            .arcs()
            .iter()
            .map(|a| (g.arc(a.arc).tail, g.arc(a.arc).head))
            .collect();
        assert!(!kept.contains(&(fx.c, fx.t)));
        assert!(!kept.contains(&(fx.a, fx.c)));
        assert!(kept.contains(&(fx.b, fx.t)));
        assert_eq!(kept.len(), 5);
    }

    #[test]
    fn tight_bound_gives_empty_subgraph() {
        let fx = example_network(4.9, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        assert!(sub.is_empty());
    }

    #[test]
    fn loose_bound_keeps_everything() {
        let fx = example_network(1e9, &[1.0]);
        let sub = build_od_subgraph(&fx.instance.graph, 0, &fx.instance.pairs[0], DEFAULT_TIME_TOL);
        assert_eq!(sub.node_count(), 6);
        assert_eq!(sub.arcs().len(), 8);
    }

    #[test]
    fn verify_example_network_routes() {
        let fx = example_network(5.0, &[1.0]);
        let inst = &fx.instance;
        let ok = Solution::new(inst, [fx.b].into(), vec![vec![fx.s, fx.b, fx.t]]);
        assert!(verify_solution(inst, &ok).passed());

        let slow = Solution::new(inst, [fx.a, fx.c].into(), vec![vec![fx.s, fx.a, fx.c, fx.t]]);
        let verdict = verify_solution(inst, &slow);
        assert!(matches!(verdict.first(), Some(Violation::TimeExceeded { time, .. }) if *time == 6.0));

        let closed = Solution::new(inst, BTreeSet::new(), vec![vec![fx.s, fx.b, fx.t]]);
        assert!(matches!(
            verify_solution(inst, &closed).first(),
            Some(Violation::ClosedStation { .. })
        ));
    }

    #[test]
    fn verify_flags_capacity() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance.capacity[fx.b] = 1.0;
        let inst = &fx.instance;
        let route = vec![fx.s, fx.b, fx.t];
        let sol = Solution::new(inst, [fx.b].into(), vec![route.clone(), route]);
        let verdict = verify_solution(inst, &sol);
        assert_eq!(
            verdict.first(),
            Some(&Violation::Capacity {
                station: fx.b,
                load: 2.0,
                capacity: 1.0
            })
        );
    }

    #[test]
    fn verify_flags_repeats() {
        let fx = example_network(100.0, &[1.0]);
        let inst = &fx.instance;
        let sol = Solution::new(inst, [fx.b].into(), vec![vec![fx.s, fx.b, fx.b, fx.t]]);
        let v = verify_solution(inst, &sol);
        assert!(v.violations.iter().any(|x| matches!(x, Violation::RepeatedNode { .. })));
    }
}
