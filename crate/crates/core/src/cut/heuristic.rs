//! Constrained-shortest-path primal heuristic with FIFO eviction repair.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::{csp_exact, CspQuery};
use crate::instance::Instance;
use crate::network::{NodeId, OdSubgraph, Solution};
use crate::solve::HeuristicRecord;

const FIT_TOL: f64 = 1e-9;
const HOP_PENALTY: f64 = 1e-6;
const EVICTION_FACTOR: usize = 5;

/// Loads, committed routes and per-station FIFO queues of the pairs routed
/// through each station.
#[derive(Debug, Clone)]
pub struct HeuristicState {
    pub load: Vec<f64>,
    pub routes: Vec<Option<Vec<NodeId>>>,
    pub station_queue: Vec<VecDeque<usize>>,
    pub od_queue: VecDeque<usize>,
    pub evictions: usize,
    pub eviction_cap: usize,
}

impl HeuristicState {
    pub fn new(instance: &Instance) -> Self {
        let n = instance.graph.node_count();
        let q = instance.pairs.len();
        HeuristicState {
            load: vec![0.0; n],
            routes: vec![None; q],
            station_queue: vec![VecDeque::new(); n],
            od_queue: (0..q).collect(),
            evictions: 0,
            eviction_cap: EVICTION_FACTOR * q,
        }
    }

    fn unassign(&mut self, instance: &Instance, q: usize) {
        let Some(route) = self.routes[q].take() else { return };
        let f = instance.pairs[q].demand;
        for &u in interior(&route) {
            self.load[u] -= f;
            self.station_queue[u].retain(|&p| p != q);
        }
        self.od_queue.push_back(q);
    }
}

fn interior(route: &[NodeId]) -> &[NodeId] {
    if route.len() < 2 {
        &[]
    } else {
        &route[1..route.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvictionGuardHit;

/// Commits `path` for pair `q`. A station without room evicts earlier pairs
/// in arrival order, which go back on the OD queue, until `q` fits.
pub fn heuristic_resolve_infeasibility(
    instance: &Instance,
    state: &mut HeuristicState,
    q: usize,
    path: Vec<NodeId>,
) -> Result<(), EvictionGuardHit> {
    let f = instance.pairs[q].demand;
    for &v in interior(&path) {
        let kappa = instance.capacity[v];
        while state.load[v] + f > kappa + FIT_TOL {
            let Some(victim) = state.station_queue[v].front().copied() else {
                return Err(EvictionGuardHit);
            };
            state.unassign(instance, victim);
            state.evictions += 1;
            if state.evictions > state.eviction_cap {
                return Err(EvictionGuardHit);
            }
        }
        state.load[v] += f;
        state.station_queue[v].push_back(q);
    }
    state.routes[q] = Some(path);
    Ok(())
}

/// Node costs for pair `q` given the current loads: stations that cannot
/// ever host the pair are barred, stations that need evictions are priced
/// above any eviction-free route, built stations are free and the rest pay
/// `1 - zbar`.
pub fn heuristic_costs(instance: &Instance, sub: &OdSubgraph, load: &[f64], zbar: &dyn Fn(NodeId) -> f64) -> Vec<f64> {
    let f = instance.pairs[sub.pair].demand;
    let big = sub.node_count() as f64 + 1.0;
    (0..sub.node_count())
        .map(|i| {
            if !sub.is_station(i) {
                return 0.0;
            }
            let v = sub.global(i);
            let kappa = instance.capacity[v];
            let base = if f > kappa + FIT_TOL {
                f64::INFINITY
            } else if load[v] + f > kappa + FIT_TOL {
                big
            } else if load[v] > 0.0 {
                0.0
            } else {
                (1.0 - zbar(v)).clamp(0.0, 1.0)
            };
            base + HOP_PENALTY
        })
        .collect()
}

/// Routes the pairs one at a time along cheapest time-feasible paths and
/// opens exactly the stations that carry flow. `zbar(q, v)` is the LP value
/// of station `v` for pair `q`.
pub fn primal_heuristic_csp(
    instance: &Instance,
    subgraphs: &[OdSubgraph],
    zbar: &dyn Fn(usize, NodeId) -> f64,
) -> HeuristicRecord {
    let mut state = HeuristicState::new(instance);
    let failed = |state: &HeuristicState, guard_hit| HeuristicRecord {
        solution: None,
        evictions: state.evictions,
        guard_hit,
    };
    while let Some(q) = state.od_queue.pop_front() {
        let sub = &subgraphs[q];
        if sub.is_empty() {
            return failed(&state, false);
        }
        let costs = heuristic_costs(instance, sub, &state.load, &|v| zbar(q, v));
        let query = CspQuery {
            node_cost: &costs,
            forbidden: &[],
            bound: sub.time_bound,
        };
        let Some(path) = csp_exact(sub, &query) else {
            return failed(&state, false);
        };
        let global = sub.to_global_path(&path.nodes);
        if heuristic_resolve_infeasibility(instance, &mut state, q, global).is_err() {
            return failed(&state, true);
        }
    }
    let routes: Vec<Vec<NodeId>> = state.routes.iter().map(|r| r.clone().unwrap_or_default()).collect();
    let open: BTreeSet<NodeId> = instance.stations().filter(|&v| state.load[v] > FIT_TOL).collect();
    HeuristicRecord {
        solution: Some(Solution::new(instance, open, routes)),
        evictions: state.evictions,
        guard_hit: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;
    use crate::network::verify_solution;

    #[test]
    fn prefers_high_lp_value_station() {
        let fx = example_network(5.0, &[1.0]);
        let subs = fx.instance.subgraphs();
        let b = fx.b;
        let rec = primal_heuristic_csp(&fx.instance, &subs, &|_, v| if v == b { 0.9 } else { 0.1 });
        let sol = rec.solution.unwrap();
        assert_eq!(sol.routes[0], vec![fx.s, fx.b, fx.t]);
        assert_eq!(sol.objective, 1.0);
        assert!(verify_solution(&fx.instance, &sol).passed());
    }

    #[test]
    fn capacity_pushes_second_pair_elsewhere() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance.capacity[fx.b] = 1.0;
        let subs = fx.instance.subgraphs();
        let b = fx.b;
        let rec = primal_heuristic_csp(&fx.instance, &subs, &|_, v| if v == b { 0.9 } else { 0.1 });
        let sol = rec.solution.unwrap();
        assert_eq!(sol.routes[0], vec![fx.s, fx.b, fx.t]);
        assert_eq!(sol.routes[1], vec![fx.s, fx.a, fx.d, fx.t]);
        assert_eq!(sol.objective, 3.0);
        assert_eq!(rec.evictions, 0);
        assert!(verify_solution(&fx.instance, &sol).passed());
    }

    #[test]
    fn eviction_requeues_victim_once() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance.capacity[fx.b] = 1.0;
        let mut state = HeuristicState::new(&fx.instance);
        state.od_queue.clear();
        heuristic_resolve_infeasibility(&fx.instance, &mut state, 0, vec![fx.s, fx.b, fx.t]).unwrap();
        heuristic_resolve_infeasibility(&fx.instance, &mut state, 1, vec![fx.s, fx.b, fx.t]).unwrap();
        assert_eq!(state.evictions, 1);
        assert_eq!(state.od_queue, VecDeque::from(vec![0]));
        assert!(state.routes[0].is_none());
        assert_eq!(state.load[fx.b], 1.0);
    }

    #[test]
    fn oversized_pair_fails() {
        let mut fx = example_network(5.0, &[2.0]);
        for v in [fx.a, fx.b, fx.c, fx.d] {
            fx.instance.capacity[v] = 1.0;
        }
        let subs = fx.instance.subgraphs();
        let rec = primal_heuristic_csp(&fx.instance, &subs, &|_, _| 0.5);
        assert!(rec.solution.is_none());
        assert!(!rec.guard_hit);
    }
}
