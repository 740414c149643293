//! Best-bound branch-and-bound driver shared by both formulations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::instance::Instance;
use crate::network::{verify_solution, Solution};
use crate::solve::SolveStatus;

const BOUND_EPS: f64 = 1e-6;
const MAX_NODE_PASSES: usize = 100_000;
const HEURISTIC_EVERY: usize = 10;

/// Read-only facts about the node being processed.
#[derive(Debug, Clone, Copy)]
pub struct NodeInfo {
    pub id: usize,
    pub depth: usize,
    pub parent_bound: f64,
    /// Smallest bound over all open nodes, including this one.
    pub global_bound: f64,
}

impl NodeInfo {
    pub fn is_root(&self) -> bool {
        self.id == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpOutcome {
    Optimal(f64),
    Infeasible,
    Failed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PricingOutcome {
    pub added: usize,
    /// Valid lower bound on the node relaxation, when known.
    pub lagrangian: Option<f64>,
    /// Pricing stopped before proving the relaxation optimal.
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Integrality {
    Feasible(Solution),
    /// Integral, but the node admits no real solution.
    Infeasible,
    Fractional,
}

/// Problem-specific callbacks. Rows and columns persist across nodes;
/// `enter_node` must reset every bound to the root state before applying
/// the decisions.
pub trait BranchProblem {
    type Decision: Clone + fmt::Debug;

    fn enter_node(&mut self, decisions: &[Self::Decision]);

    fn solve_lp(&mut self) -> LpOutcome;

    /// Generates columns; `allow_early` permits stopping before the
    /// relaxation is proven optimal.
    fn price(&mut self, _node: &NodeInfo, _allow_early: bool) -> PricingOutcome {
        PricingOutcome::default()
    }

    /// Adds violated rows; `limited` says whether the capped rounds (all but
    /// lazy constraints) may run. Returns the number of rows added.
    fn separate(&mut self, node: &NodeInfo, limited: bool) -> usize;

    fn check_integral(&mut self) -> Integrality;

    /// Children as lists of additional decisions.
    fn branch(&mut self) -> Vec<Vec<Self::Decision>>;

    fn heuristic(&mut self) -> Option<Solution> {
        None
    }

    fn round_cap(&self, is_root: bool) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BnbLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BnbOutcome {
    pub status: SolveStatus,
    pub incumbent: Option<Solution>,
    pub best_bound: f64,
    pub nodes: usize,
    pub elapsed: Duration,
}

struct OpenNode<D> {
    id: usize,
    depth: usize,
    bound: f64,
    decisions: Vec<D>,
}

impl<D> PartialEq for OpenNode<D> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<D> Eq for OpenNode<D> {}

impl<D> Ord for OpenNode<D> {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: smaller bound, then deeper, then older first
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl<D> PartialOrd for OpenNode<D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Index of the value closest to 0.5 among those farther than the
/// integrality tolerance from an integer; ties go to the earlier entry.
pub fn most_fractional<K: Copy>(values: impl IntoIterator<Item = (K, f64)>, tol: f64) -> Option<K> {
    let mut best: Option<(K, f64)> = None;
    for (k, v) in values {
        let frac = v - v.floor();
        if frac <= tol || frac >= 1.0 - tol {
            continue;
        }
        let score = (frac - 0.5).abs();
        if best.is_none_or(|(_, s)| score < s - 1e-12) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| k)
}

struct Driver<'a> {
    instance: &'a Instance,
    integral: bool,
    incumbent: Option<Solution>,
    cost_ceiling: f64,
}

impl Driver<'_> {
    fn round(&self, bound: f64) -> f64 {
        if self.integral && bound.is_finite() {
            (bound - BOUND_EPS).ceil()
        } else {
            bound
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some(inc) if self.integral => bound >= inc.objective - BOUND_EPS,
            Some(inc) => bound >= inc.objective - BOUND_EPS * inc.objective.abs().max(1.0),
            None => bound > self.cost_ceiling + BOUND_EPS,
        }
    }

    fn offer(&mut self, sol: Solution, origin: &str) {
        let verdict = verify_solution(self.instance, &sol);
        if !verdict.passed() {
            log::warn!("{origin} solution rejected: {:?}", verdict.first());
            return;
        }
        if self
            .incumbent
            .as_ref()
            .is_none_or(|inc| sol.objective < inc.objective - 1e-9)
        {
            log::debug!("new incumbent {} from {origin}", sol.objective);
            self.incumbent = Some(sol);
        }
    }
}

pub fn bnb_run<P: BranchProblem>(problem: &mut P, instance: &Instance, limits: BnbLimits) -> BnbOutcome {
    let start = Instant::now();
    let mut driver = Driver {
        instance,
        integral: instance.integral_costs(),
        incumbent: None,
        cost_ceiling: instance.total_station_cost(),
    };
    let mut heap: BinaryHeap<OpenNode<P::Decision>> = BinaryHeap::new();
    heap.push(OpenNode {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        decisions: Vec::new(),
    });
    let mut next_id = 1;
    let mut processed = 0usize;
    let mut interrupted: Option<f64> = None;
    let mut trouble = false;
    let out_of_time = |start: &Instant| limits.time_limit.is_some_and(|t| start.elapsed() >= t);

    'nodes: while let Some(node) = heap.pop() {
        if driver.prunable(node.bound) {
            continue;
        }
        if out_of_time(&start) || limits.node_limit.is_some_and(|n| processed >= n) {
            interrupted = Some(node.bound);
            break;
        }
        processed += 1;
        let global = heap.iter().map(|n| n.bound).fold(node.bound, f64::min);
        let info = NodeInfo {
            id: node.id,
            depth: node.depth,
            parent_bound: node.bound,
            global_bound: global,
        };
        problem.enter_node(&node.decisions);
        let cap = problem.round_cap(info.is_root());
        let mut rounds = 0usize;
        let mut bound = node.bound;
        let mut passes = 0usize;
        let mut allow_early = true;
        'redo: loop {
            let mut last_early;
            loop {
                passes += 1;
                if passes > MAX_NODE_PASSES || out_of_time(&start) {
                    interrupted = Some(bound);
                    break 'nodes;
                }
                match problem.solve_lp() {
                    LpOutcome::Infeasible => continue 'nodes,
                    LpOutcome::Failed => {
                        log::warn!("LP failure at node {}; node dropped", node.id);
                        trouble = true;
                        continue 'nodes;
                    }
                    LpOutcome::Optimal(obj) => {
                        let priced = problem.price(&info, allow_early);
                        last_early = priced.stopped_early;
                        if priced.added > 0 && !priced.stopped_early {
                            continue;
                        }
                        let lp_bound = if priced.stopped_early {
                            priced.lagrangian.unwrap_or(f64::NEG_INFINITY)
                        } else {
                            obj
                        };
                        bound = driver.round(bound.max(lp_bound));
                        if driver.prunable(bound) {
                            continue 'nodes;
                        }
                    }
                }
                let limited = rounds < cap;
                let added = problem.separate(&info, limited);
                if limited {
                    rounds += 1;
                }
                if info.is_root() && limited {
                    if let Some(sol) = problem.heuristic() {
                        driver.offer(sol, "heuristic");
                    }
                }
                if added == 0 {
                    break;
                }
            }
            match problem.check_integral() {
                Integrality::Feasible(sol) => {
                    driver.offer(sol, "relaxation");
                    if last_early && !driver.prunable(bound) {
                        allow_early = false;
                        continue 'redo;
                    }
                    continue 'nodes;
                }
                Integrality::Infeasible if last_early => {
                    allow_early = false;
                    continue 'redo;
                }
                Integrality::Infeasible => continue 'nodes,
                Integrality::Fractional => break 'redo,
            }
        }
        if !info.is_root() && processed.is_multiple_of(HEURISTIC_EVERY) {
            if let Some(sol) = problem.heuristic() {
                driver.offer(sol, "heuristic");
            }
            if driver.prunable(bound) {
                continue;
            }
        }
        let children = problem.branch();
        if children.is_empty() {
            log::warn!("no branching candidate at fractional node {}", node.id);
            trouble = true;
            continue;
        }
        for extra in children {
            let mut decisions = node.decisions.clone();
            decisions.extend(extra);
            heap.push(OpenNode {
                id: next_id,
                depth: node.depth + 1,
                bound,
                decisions,
            });
            next_id += 1;
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .chain(interrupted)
        .filter(|&b| !driver.prunable(b))
        .fold(f64::INFINITY, f64::min);
    let complete = interrupted.is_none() && !trouble;
    let (status, best_bound) = match (&driver.incumbent, complete) {
        (Some(inc), true) => (SolveStatus::Optimal, inc.objective),
        (None, true) => (SolveStatus::Infeasible, f64::INFINITY),
        (Some(inc), false) => (SolveStatus::Limit, open_bound.min(inc.objective)),
        (None, false) => (SolveStatus::Limit, open_bound),
    };
    BnbOutcome {
        status,
        incumbent: driver.incumbent,
        best_bound,
        nodes: processed,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_fractional_prefers_half() {
        assert_eq!(most_fractional([(0, 0.5), (1, 0.9)], 1e-6), Some(0));
        assert_eq!(most_fractional([(0, 0.3), (1, 0.7)], 1e-6), Some(0));
        assert_eq!(most_fractional([(0, 1.0), (1, 0.0)], 1e-6), None);
        assert_eq!(most_fractional([(4, 1.0 - 1e-9), (7, 0.4)], 1e-6), Some(7));
    }

    #[test]
    fn heap_orders_by_bound_then_depth() {
        let mut heap = BinaryHeap::new();
        for (id, depth, bound) in [(1, 1, 2.0), (2, 3, 1.0), (3, 5, 1.0), (4, 0, 0.5)] {
            heap.push(OpenNode::<()> {
                id,
                depth,
                bound,
                decisions: Vec::new(),
            });
        }
        let order: Vec<usize> = std::iter::from_fn(|| heap.pop().map(|n| n.id)).collect();
        assert_eq!(order, vec![4, 3, 2, 1]);
    }
}
