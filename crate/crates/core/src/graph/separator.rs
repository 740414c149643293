//! Time-separators: station sets that meet every time-feasible path of an
//! OD pair.

use thiserror::Error;

use super::dijkstra::{dijkstra, hop_distances, DijkstraCounter, Direction};
use crate::network::{NodeId, OdSubgraph};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeSeparator {
    pub pair: usize,
    /// Global station ids, sorted ascending.
    pub stations: Vec<NodeId>,
}

impl TimeSeparator {
    pub fn from_local(sub: &OdSubgraph, local: &[usize]) -> Self {
        let mut stations: Vec<NodeId> = local.iter().map(|&i| sub.global(i)).collect();
        stations.sort_unstable();
        stations.dedup();
        TimeSeparator {
            pair: sub.pair,
            stations,
        }
    }

    pub fn to_local(&self, sub: &OdSubgraph) -> Vec<usize> {
        self.stations.iter().filter_map(|&v| sub.local(v)).collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SeparatorError {
    #[error("station set {0:?} is not a time-separator")]
    NotASeparator(Vec<NodeId>),
}

/// Whether some time-feasible path avoids every station in `blocked`.
pub fn has_feasible_path_avoiding(sub: &OdSubgraph, blocked: &[bool], counter: &DijkstraCounter) -> bool {
    if sub.is_empty() {
        return false;
    }
    let w = |a: usize| {
        let arc = sub.arc(a);
        (!blocked[arc.tail] && !blocked[arc.head]).then_some(arc.tau)
    };
    let sp = dijkstra(sub, sub.source(), Direction::Forward, w, counter);
    sub.within_bound(sp.dist[sub.target()])
}

pub fn is_time_separator(sub: &OdSubgraph, local: &[usize], counter: &DijkstraCounter) -> bool {
    let mut blocked = vec![false; sub.node_count()];
    for &i in local {
        blocked[i] = true;
    }
    !has_feasible_path_avoiding(sub, &blocked, counter)
}

/// Drops members in descending station-id order while the set stays a
/// time-separator. Each removal test runs one forward and one backward
/// Dijkstra with the other members blocked.
pub(crate) fn minimalize_local(sub: &OdSubgraph, local: &[usize], counter: &DijkstraCounter) -> Vec<usize> {
    let mut order: Vec<usize> = local.to_vec();
    order.sort_unstable_by_key(|&i| std::cmp::Reverse(sub.global(i)));
    order.dedup();
    let mut blocked = vec![false; sub.node_count()];
    for &i in &order {
        blocked[i] = true;
    }
    for &v in &order {
        blocked[v] = false;
        let w = |a: usize| {
            let arc = sub.arc(a);
            (!blocked[arc.tail] && !blocked[arc.head]).then_some(arc.tau)
        };
        let fwd = dijkstra(sub, sub.source(), Direction::Forward, w, counter);
        let bwd = dijkstra(sub, sub.target(), Direction::Backward, w, counter);
        if sub.within_bound(fwd.dist[v] + bwd.dist[v]) {
            // some time-feasible path needs v
            blocked[v] = true;
        }
    }
    let mut out: Vec<usize> = order.into_iter().filter(|&i| blocked[i]).collect();
    out.sort_unstable();
    out
}

pub fn minimalize_separator(
    sub: &OdSubgraph,
    separator: &TimeSeparator,
    counter: &DijkstraCounter,
) -> Result<TimeSeparator, SeparatorError> {
    // members outside the subgraph lie on no time-feasible path
    let local = separator.to_local(sub);
    if !sub.is_empty() && !is_time_separator(sub, &local, counter) {
        return Err(SeparatorError::NotASeparator(separator.stations.clone()));
    }
    if sub.is_empty() {
        return Ok(TimeSeparator {
            pair: sub.pair,
            stations: Vec::new(),
        });
    }
    Ok(TimeSeparator::from_local(sub, &minimalize_local(sub, &local, counter)))
}

/// Breadth-first layers `{v : hop(s, v) = k}` for `1 <= k < hop(s, t)`.
/// Every path from the origin crosses each layer, so each is a separator.
pub fn hop_layer_separators(sub: &OdSubgraph, minimalize: bool, counter: &DijkstraCounter) -> Vec<TimeSeparator> {
    if sub.is_empty() {
        return Vec::new();
    }
    let hops = hop_distances(sub, sub.source(), Direction::Forward, |_| true);
    let delta = hops[sub.target()];
    if delta == usize::MAX || delta <= 1 {
        return Vec::new();
    }
    let mut out: Vec<TimeSeparator> = Vec::new();
    for k in 1..delta {
        let layer: Vec<usize> = sub.stations().filter(|&i| hops[i] == k).collect();
        let layer = if minimalize {
            minimalize_local(sub, &layer, counter)
        } else {
            layer
        };
        let sep = TimeSeparator::from_local(sub, &layer);
        if !out.contains(&sep) {
            out.push(sep);
        }
    }
    out
}

/// Local stations that are inactive yet reachable through active stations
/// within the time budget, or `None` when an active time-feasible path
/// already exists. Runs exactly two Dijkstra searches.
pub fn integer_separator_candidates(
    sub: &OdSubgraph,
    active: &[bool],
    counter: &DijkstraCounter,
) -> Option<Vec<usize>> {
    if sub.is_empty() {
        return None;
    }
    let s = sub.source();
    let w_active = |a: usize| {
        let arc = sub.arc(a);
        (arc.tail == s || active[arc.tail]).then_some(arc.tau)
    };
    let fwd = dijkstra(sub, s, Direction::Forward, w_active, counter);
    if sub.within_bound(fwd.dist[sub.target()]) {
        return None;
    }
    let bwd = dijkstra(
        sub,
        sub.target(),
        Direction::Backward,
        |a| Some(sub.arc(a).tau),
        counter,
    );
    Some(
        sub.stations()
            .filter(|&i| !active[i] && sub.within_bound(fwd.dist[i] + bwd.dist[i]))
            .collect(),
    )
}

/// Violated time-separator for a binary station activation of one pair.
pub fn integer_time_separator(sub: &OdSubgraph, active: &[bool], counter: &DijkstraCounter) -> Option<TimeSeparator> {
    let cand = integer_separator_candidates(sub, active, counter)?;
    Some(TimeSeparator::from_local(sub, &minimalize_local(sub, &cand, counter)))
}

/// Separation that starts from the complement of the active stations and
/// minimalizes it.
pub fn baseline_time_separator(sub: &OdSubgraph, active: &[bool], counter: &DijkstraCounter) -> Option<TimeSeparator> {
    if sub.is_empty() {
        return None;
    }
    let s = sub.source();
    let w_active = |a: usize| {
        let arc = sub.arc(a);
        (arc.tail == s || active[arc.tail]).then_some(arc.tau)
    };
    let fwd = dijkstra(sub, s, Direction::Forward, w_active, counter);
    if sub.within_bound(fwd.dist[sub.target()]) {
        return None;
    }
    let trivial: Vec<usize> = sub.stations().filter(|&i| !active[i]).collect();
    Some(TimeSeparator::from_local(
        sub,
        &minimalize_local(sub, &trivial, counter),
    ))
}
