//! Resource-constrained shortest paths over a pair subgraph: minimize the
//! sum of node costs subject to the transit-time bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::dijkstra::{dijkstra, DijkstraCounter, Direction};
use crate::network::OdSubgraph;

const DOMINANCE_TOL: f64 = 1e-9;
const LARAC_MAX_ITER: usize = 50;
const LARAC_THETA_TOL: f64 = 1e-7;

/// A path in local subgraph indexes with its time and custom cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostedPath {
    pub nodes: Vec<usize>,
    pub time: f64,
    pub cost: f64,
}

/// Costs and restrictions of one CSP query. `node_cost` is indexed by local
/// node; infinite cost bars the node. `forbidden` marks local arcs that may
/// not be used.
#[derive(Debug, Clone, Copy)]
pub struct CspQuery<'a> {
    pub node_cost: &'a [f64],
    pub forbidden: &'a [bool],
    pub bound: f64,
}

impl CspQuery<'_> {
    fn arc_cost(&self, sub: &OdSubgraph, a: usize) -> Option<f64> {
        if self.forbidden.get(a).copied().unwrap_or(false) {
            return None;
        }
        let head = sub.arc(a).head;
        let c = if sub.is_station(head) {
            self.node_cost[head]
        } else {
            0.0
        };
        c.is_finite().then_some(c)
    }

    fn evaluate(&self, sub: &OdSubgraph, nodes: Vec<usize>) -> CostedPath {
        let time = sub.path_time(&nodes).unwrap_or(f64::INFINITY);
        let cost = nodes
            .iter()
            .filter(|&&i| sub.is_station(i))
            .map(|&i| self.node_cost[i])
            .sum();
        CostedPath { nodes, time, cost }
    }
}

#[derive(Debug, Clone)]
struct Label {
    node: usize,
    time: f64,
    cost: f64,
    pred: Option<usize>,
    alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    cost: f64,
    id: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.cost.total_cmp(&self.cost))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dominates(a: &Label, time: f64, cost: f64) -> bool {
    a.time <= time + DOMINANCE_TOL && a.cost <= cost + DOMINANCE_TOL
}

/// Exact label-setting CSP with (time, cost) dominance. Returns the
/// minimum-cost path within the time bound, ties broken by smaller time.
pub fn csp_exact(sub: &OdSubgraph, query: &CspQuery) -> Option<CostedPath> {
    if sub.is_empty() {
        return None;
    }
    let (s, t) = (sub.source(), sub.target());
    let bound = query.bound + sub.tol;
    let mut labels = vec![Label {
        node: s,
        time: 0.0,
        cost: 0.0,
        pred: None,
        alive: true,
    }];
    let mut at_node: Vec<Vec<usize>> = vec![Vec::new(); sub.node_count()];
    at_node[s].push(0);
    let mut heap = BinaryHeap::from([Pending {
        time: 0.0,
        cost: 0.0,
        id: 0,
    }]);
    while let Some(Pending { id, .. }) = heap.pop() {
        if !labels[id].alive {
            continue;
        }
        let (v, time, cost) = (labels[id].node, labels[id].time, labels[id].cost);
        if v == t {
            continue;
        }
        for &a in sub.out_arcs(v) {
            let Some(c) = query.arc_cost(sub, a) else { continue };
            let arc = sub.arc(a);
            let w = arc.head;
            let (nt, nc) = (time + arc.tau, cost + c);
            if nt + sub.time_to_target(w) > bound {
                continue;
            }
            if at_node[w].iter().any(|&l| dominates(&labels[l], nt, nc)) {
                continue;
            }
            let mut kept = Vec::with_capacity(at_node[w].len() + 1);
            for &l in &at_node[w] {
                if labels[l].time >= nt - DOMINANCE_TOL && labels[l].cost >= nc - DOMINANCE_TOL {
                    labels[l].alive = false;
                } else {
                    kept.push(l);
                }
            }
            let nid = labels.len();
            labels.push(Label {
                node: w,
                time: nt,
                cost: nc,
                pred: Some(id),
                alive: true,
            });
            kept.push(nid);
            at_node[w] = kept;
            heap.push(Pending {
                time: nt,
                cost: nc,
                id: nid,
            });
        }
    }
    let best = at_node[t]
        .iter()
        .copied()
        .filter(|&l| labels[l].alive)
        .min_by(|&x, &y| {
            labels[x]
                .cost
                .total_cmp(&labels[y].cost)
                .then_with(|| labels[x].time.total_cmp(&labels[y].time))
        })?;
    let mut nodes = Vec::new();
    let mut cur = Some(best);
    while let Some(l) = cur {
        nodes.push(labels[l].node);
        cur = labels[l].pred;
    }
    nodes.reverse();
    debug_assert!({
        let mut seen = nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    });
    Some(query.evaluate(sub, nodes))
}

fn combined_path(
    sub: &OdSubgraph,
    query: &CspQuery,
    theta: Option<f64>,
    counter: &DijkstraCounter,
) -> Option<CostedPath> {
    let weight = |a: usize| {
        let c = query.arc_cost(sub, a)?;
        let tau = sub.arc(a).tau;
        Some(match theta {
            Some(th) => c + th * tau,
            None => tau,
        })
    };
    let sp = dijkstra(sub, sub.source(), Direction::Forward, weight, counter);
    sp.path(sub.target()).map(|nodes| query.evaluate(sub, nodes))
}

/// Lagrangian relaxation heuristic: Dijkstra on `cost + theta * time` with
/// the multiplier updated from the current feasible/infeasible pair.
/// Any returned path respects the time bound.
pub fn csp_larac(sub: &OdSubgraph, query: &CspQuery, counter: &DijkstraCounter) -> Option<CostedPath> {
    if sub.is_empty() {
        return None;
    }
    let bound = query.bound + sub.tol;
    let mut pc = combined_path(sub, query, Some(0.0), counter)?;
    if pc.time <= bound {
        return Some(pc);
    }
    let mut pd = combined_path(sub, query, None, counter)?;
    if pd.time > bound {
        return None;
    }
    let mut last_theta = f64::NEG_INFINITY;
    for _ in 0..LARAC_MAX_ITER {
        let dt = pc.time - pd.time;
        if dt <= 0.0 {
            break;
        }
        let theta = ((pd.cost - pc.cost) / dt).max(0.0);
        if (theta - last_theta).abs() < LARAC_THETA_TOL {
            break;
        }
        last_theta = theta;
        let Some(r) = combined_path(sub, query, Some(theta), counter) else {
            break;
        };
        let lr = r.cost + theta * r.time;
        let lc = pc.cost + theta * pc.time;
        if (lr - lc).abs() <= 1e-9 * lc.abs().max(1.0) {
            break;
        }
        if r.time <= bound {
            pd = r;
        } else {
            pc = r;
        }
    }
    Some(pd)
}
