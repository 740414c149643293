//! Exhaustive reference solver for small instances.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::instance::Instance;
use crate::network::{NodeId, OdSubgraph, Solution};

pub const ORACLE_MAX_STATIONS: usize = 16;
const FIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{found} stations exceed the oracle limit of {limit}")]
    TooManyStations { found: usize, limit: usize },
}

/// Optimal solution, or `None` when the instance is infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub solution: Option<Solution>,
}

impl OracleResult {
    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.objective)
    }
}

/// Every simple time-feasible path of the subgraph, as local node lists.
pub fn enumerate_feasible_paths(sub: &OdSubgraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if sub.is_empty() {
        return out;
    }
    let mut path = vec![sub.source()];
    let mut on = vec![false; sub.node_count()];
    on[sub.source()] = true;
    dfs(sub, &mut path, &mut on, 0.0, &mut out);
    out
}

fn dfs(sub: &OdSubgraph, path: &mut Vec<usize>, on: &mut [bool], time: f64, out: &mut Vec<Vec<usize>>) {
    let v = *path.last().expect("nonempty path");
    if v == sub.target() {
        out.push(path.clone());
        return;
    }
    for &a in sub.out_arcs(v) {
        let arc = sub.arc(a);
        let t = time + arc.tau;
        if on[arc.head] || !sub.within_bound(t + sub.time_to_target(arc.head)) {
            continue;
        }
        on[arc.head] = true;
        path.push(arc.head);
        dfs(sub, path, on, t, out);
        path.pop();
        on[arc.head] = false;
    }
}

/// A path option of one pair: station bitmask and global route.
#[derive(Debug, Clone)]
struct PathOption {
    mask: u32,
    route: Vec<NodeId>,
}

/// Options with inclusion-minimal station sets.
fn minimal_options(sub: &OdSubgraph, bit: &[Option<usize>]) -> Vec<PathOption> {
    let mut all: Vec<PathOption> = enumerate_feasible_paths(sub)
        .into_iter()
        .map(|p| {
            let route = sub.to_global_path(&p);
            let mask = route[1..route.len() - 1]
                .iter()
                .fold(0u32, |m, &v| m | (1 << bit[v].expect("interior is a station")));
            PathOption { mask, route }
        })
        .collect();
    all.sort_by_key(|o| (o.mask.count_ones(), o.mask, o.route.clone()));
    let mut kept: Vec<PathOption> = Vec::new();
    for o in all {
        if !kept.iter().any(|k| k.mask & o.mask == k.mask) {
            kept.push(o);
        }
    }
    kept
}

fn assign(
    order: &[usize],
    options: &[Vec<&PathOption>],
    demand: &[f64],
    cap: &[f64],
    load: &mut [f64],
    chosen: &mut [usize],
    depth: usize,
) -> bool {
    let Some(&q) = order.get(depth) else { return true };
    for (k, o) in options[q].iter().enumerate() {
        let bits = (0..cap.len()).filter(|&b| o.mask & (1 << b) != 0);
        if bits.clone().any(|b| load[b] + demand[q] > cap[b] + FIT_TOL) {
            continue;
        }
        for b in bits.clone() {
            load[b] += demand[q];
        }
        chosen[q] = k;
        if assign(order, options, demand, cap, load, chosen, depth + 1) {
            return true;
        }
        for b in bits {
            load[b] -= demand[q];
        }
    }
    false
}

/// Routes for every pair inside the station set `mask`, if capacities
/// allow.
fn routing_within(mask: u32, options: &[Vec<PathOption>], demand: &[f64], cap: &[f64]) -> Option<Vec<Vec<NodeId>>> {
    let allowed: Vec<Vec<&PathOption>> = options
        .iter()
        .map(|os| os.iter().filter(|o| o.mask & !mask == 0).collect())
        .collect();
    if allowed.iter().any(|a| a.is_empty()) {
        return None;
    }
    let mut order: Vec<usize> = (0..options.len()).collect();
    order.sort_by_key(|&q| (allowed[q].len(), q));
    let mut load = vec![0.0; cap.len()];
    let mut chosen = vec![0; options.len()];
    if !assign(&order, &allowed, demand, cap, &mut load, &mut chosen, 0) {
        return None;
    }
    Some(
        chosen
            .iter()
            .enumerate()
            .map(|(q, &k)| allowed[q][k].route.clone())
            .collect(),
    )
}

/// Scans station subsets by nondecreasing cost and returns the first one
/// that admits a capacity-feasible routing of every pair.
pub fn brute_force_oracle(instance: &Instance) -> Result<OracleResult, OracleError> {
    let stations: Vec<NodeId> = instance.stations().collect();
    if stations.len() > ORACLE_MAX_STATIONS {
        return Err(OracleError::TooManyStations {
            found: stations.len(),
            limit: ORACLE_MAX_STATIONS,
        });
    }
    let mut bit = vec![None; instance.graph.node_count()];
    for (b, &v) in stations.iter().enumerate() {
        bit[v] = Some(b);
    }
    let subs = instance.subgraphs();
    let options: Vec<Vec<PathOption>> = subs.iter().map(|s| minimal_options(s, &bit)).collect();
    let demand: Vec<f64> = instance.pairs.iter().map(|p| p.demand).collect();
    let cap: Vec<f64> = stations.iter().map(|&v| instance.capacity[v]).collect();
    let full = (1u32 << stations.len()) - 1;
    if routing_within(full, &options, &demand, &cap).is_none() {
        return Ok(OracleResult { solution: None });
    }
    let cost = |m: u32| -> f64 {
        (0..stations.len())
            .filter(|&b| m & (1 << b) != 0)
            .map(|b| instance.cost[stations[b]])
            .sum()
    };
    let mut masks: Vec<u32> = (0..=full).collect();
    masks.sort_by(|&a, &b| {
        cost(a)
            .total_cmp(&cost(b))
            .then(a.count_ones().cmp(&b.count_ones()))
            .then(a.cmp(&b))
    });
    for m in masks {
        if let Some(routes) = routing_within(m, &options, &demand, &cap) {
            let open: BTreeSet<NodeId> = (0..stations.len())
                .filter(|&b| m & (1 << b) != 0)
                .map(|b| stations[b])
                .collect();
            return Ok(OracleResult {
                solution: Some(Solution::new(instance, open, routes)),
            });
        }
    }
    unreachable!("the full station set admits a routing")
}
