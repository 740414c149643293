//! Branch-and-cut over the cut formulation: time-separator coverage rows on
//! per-pair station variables, capacity and linking rows, lifted covers.

pub mod heuristic;
pub mod lci;

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use crate::bnb::{bnb_run, most_fractional, BnbLimits, BranchProblem, Integrality, LpOutcome, NodeInfo};
use crate::graph::{
    baseline_time_separator, dijkstra, fractional_separator_mincut, hop_layer_separators, integer_time_separator,
    DijkstraCounter, Direction, TimeSeparator,
};
use crate::instance::Instance;
use crate::lp::{LpModel, LpSolution, LpStatus, Sense, INT_TOL};
use crate::network::{NodeId, OdSubgraph, Solution};
use crate::solve::{SeparationVariant, SolveResult, SolveStatus, SolveTrace, SolverConfig};

use self::heuristic::primal_heuristic_csp;
use self::lci::{lifted_cover, CoverItem, LiftedCover};

const VIOLATION_TOL: f64 = 1e-6;
const SATURATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfDecision {
    Station(NodeId, bool),
    /// Station variable of pair `q` at station `v`.
    Assign(usize, NodeId, bool),
}

/// Column layout and cut pools of one cut-formulation solve.
struct CfModel<'a> {
    inst: &'a Instance,
    config: &'a SolverConfig,
    subs: Vec<OdSubgraph>,
    /// Only station columns, no per-pair variables.
    uncapacitated: bool,
    lp: LpModel,
    x_col: Vec<Option<usize>>,
    /// `z_col[q][i]`: column of local station `i` of pair `q`.
    z_col: Vec<Vec<Option<usize>>>,
    separators: HashSet<TimeSeparator>,
    covers: HashSet<LiftedCover>,
    sol: Option<LpSolution>,
    counter: DijkstraCounter,
    trace: SolveTrace,
}

impl<'a> CfModel<'a> {
    fn build(inst: &'a Instance, config: &'a SolverConfig, subs: Vec<OdSubgraph>, uncapacitated: bool) -> Self {
        let n = inst.graph.node_count();
        let mut lp = LpModel::new();
        let mut used = vec![false; n];
        for sub in &subs {
            for i in sub.stations() {
                used[sub.global(i)] = true;
            }
        }
        let mut x_col = vec![None; n];
        for v in inst.stations().filter(|&v| used[v]) {
            x_col[v] = Some(lp.add_column(inst.cost[v], 0.0, 1.0, &[]).expect("finite cost"));
        }
        let mut z_col = Vec::with_capacity(subs.len());
        for sub in &subs {
            let mut cols = vec![None; sub.node_count()];
            if !uncapacitated {
                for i in sub.stations() {
                    cols[i] = Some(lp.add_column(0.0, 0.0, 1.0, &[]).expect("finite"));
                }
            }
            z_col.push(cols);
        }
        let mut model = CfModel {
            inst,
            config,
            subs,
            uncapacitated,
            lp,
            x_col,
            z_col,
            separators: HashSet::new(),
            covers: HashSet::new(),
            sol: None,
            counter: DijkstraCounter::default(),
            trace: SolveTrace::default(),
        };
        if !uncapacitated {
            model.add_capacity_and_linking_rows();
        }
        for q in (0..model.subs.len()).filter(|_| config.layer_rows) {
            for sep in hop_layer_separators(&model.subs[q], true, &model.counter) {
                model.add_separator(sep);
            }
        }
        model
    }

    fn add_capacity_and_linking_rows(&mut self) {
        let n = self.inst.graph.node_count();
        let mut terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (q, sub) in self.subs.iter().enumerate() {
            let f = self.inst.pairs[q].demand;
            for i in sub.stations() {
                let v = sub.global(i);
                let z = self.z_col[q][i].expect("station column");
                terms[v].push((z, f));
                let x = self.x_col[v].expect("used station");
                self.lp
                    .add_row(&[(z, 1.0), (x, -1.0)], Sense::Le, 0.0)
                    .expect("linking row");
            }
        }
        for v in self.inst.stations() {
            if terms[v].is_empty() {
                continue;
            }
            let total: f64 = terms[v].iter().map(|&(_, f)| f).sum();
            let kappa = self.inst.capacity[v].min(total);
            let mut row = terms[v].clone();
            row.push((self.x_col[v].expect("used station"), -kappa));
            self.lp.add_row(&row, Sense::Le, 0.0).expect("capacity row");
        }
    }

    /// Adds `sum_{v in S} var(q, v) >= 1` unless already present.
    fn add_separator(&mut self, sep: TimeSeparator) -> bool {
        if sep.stations.is_empty() || self.separators.contains(&sep) {
            return false;
        }
        let sub = &self.subs[sep.pair];
        let coefs: Vec<(usize, f64)> = sep
            .to_local(sub)
            .into_iter()
            .map(|i| {
                let col = if self.uncapacitated {
                    self.x_col[sub.global(i)]
                } else {
                    self.z_col[sep.pair][i]
                };
                (col.expect("column for subgraph station"), 1.0)
            })
            .collect();
        self.lp.add_row(&coefs, Sense::Ge, 1.0).expect("coverage row");
        if self.config.record_trace {
            self.trace.separators.push(sep.clone());
        }
        self.separators.insert(sep);
        true
    }

    fn add_lci(&mut self, lci: LiftedCover) -> bool {
        if self.covers.contains(&lci) {
            return false;
        }
        let v = lci.station;
        let coefs: Vec<(usize, f64)> = lci
            .terms()
            .filter_map(|(q, a)| {
                let i = self.subs[q].local(v)?;
                self.z_col[q][i].map(|c| (c, a))
            })
            .collect();
        self.lp.add_row(&coefs, Sense::Le, lci.rhs()).expect("lci row");
        if self.config.record_trace {
            self.trace.lcis.push(lci.clone());
        }
        self.covers.insert(lci);
        true
    }

    fn value(&self, col: Option<usize>) -> f64 {
        match (col, &self.sol) {
            (Some(c), Some(s)) => s.primal[c],
            _ => 0.0,
        }
    }

    /// LP value of station `v` for pair `q`: `z` when present, else `x`.
    fn station_value(&self, q: usize, i: usize) -> f64 {
        if self.uncapacitated {
            self.value(self.x_col[self.subs[q].global(i)])
        } else {
            self.value(self.z_col[q][i])
        }
    }

    fn is_integral(v: f64) -> bool {
        (v - v.round()).abs() <= INT_TOL
    }

    fn locally_integral(&self, q: usize) -> bool {
        let sub = &self.subs[q];
        sub.stations().all(|i| {
            Self::is_integral(self.value(self.x_col[sub.global(i)])) && Self::is_integral(self.station_value(q, i))
        })
    }

    fn active(&self, q: usize) -> Vec<bool> {
        let sub = &self.subs[q];
        (0..sub.node_count())
            .map(|i| sub.is_station(i) && self.station_value(q, i) >= 0.5)
            .collect()
    }

    fn separate_integer(&mut self) -> usize {
        let mut added = 0;
        for q in 0..self.subs.len() {
            if !self.locally_integral(q) {
                continue;
            }
            let active = self.active(q);
            let sub = &self.subs[q];
            let sep = match self.config.separation {
                SeparationVariant::Baseline if self.uncapacitated => {
                    baseline_time_separator(sub, &active, &self.counter)
                }
                _ => integer_time_separator(sub, &active, &self.counter),
            };
            if let Some(sep) = sep {
                if self.add_separator(sep) {
                    added += 1;
                }
            }
        }
        added
    }

    fn separate_fractional(&mut self) -> usize {
        let mut added = 0;
        for q in 0..self.subs.len() {
            if self.locally_integral(q) {
                continue;
            }
            let sub = &self.subs[q];
            let weights: Vec<f64> = (0..sub.node_count())
                .map(|i| {
                    if sub.is_station(i) {
                        self.station_value(q, i)
                    } else {
                        0.0
                    }
                })
                .collect();
            if let Some((sep, weight)) = fractional_separator_mincut(sub, &weights, &self.counter) {
                if weight < 1.0 - VIOLATION_TOL && self.add_separator(sep) {
                    added += 1;
                }
            }
        }
        added
    }

    fn separate_lci(&mut self) -> usize {
        let n = self.inst.graph.node_count();
        let mut items: Vec<Vec<CoverItem>> = vec![Vec::new(); n];
        for (q, sub) in self.subs.iter().enumerate() {
            for i in sub.stations() {
                items[sub.global(i)].push(CoverItem {
                    pair: q,
                    value: self.value(self.z_col[q][i]),
                    demand: self.inst.pairs[q].demand,
                });
            }
        }
        let mut added = 0;
        for v in self.inst.stations() {
            let kappa = self.inst.capacity[v];
            if items[v].is_empty() || !kappa.is_finite() {
                continue;
            }
            let used: f64 = items[v].iter().map(|it| it.demand * it.value).sum();
            if used < kappa * self.value(self.x_col[v]) - SATURATION_TOL {
                continue;
            }
            let Some(lci) = lifted_cover(v, &items[v], kappa) else {
                continue;
            };
            let z: Vec<(usize, f64)> = items[v].iter().map(|it| (it.pair, it.value)).collect();
            let lhs = lci.lhs(|q| z.iter().find(|&&(p, _)| p == q).map_or(0.0, |&(_, val)| val));
            if lhs > lci.rhs() + VIOLATION_TOL && self.add_lci(lci) {
                added += 1;
            }
        }
        added
    }

    /// Route of an integral, covered pair through its active stations.
    fn route(&self, q: usize) -> Option<Vec<NodeId>> {
        let sub = &self.subs[q];
        let active = self.active(q);
        let s = sub.source();
        let w = |a: usize| {
            let arc = sub.arc(a);
            (arc.tail == s || active[arc.tail]).then_some(arc.tau)
        };
        let sp = dijkstra(sub, s, Direction::Forward, w, &self.counter);
        let t = sub.target();
        if !sub.within_bound(sp.dist[t]) {
            return None;
        }
        sp.path(t).map(|p| sub.to_global_path(&p))
    }
}

impl BranchProblem for CfModel<'_> {
    type Decision = CfDecision;

    fn enter_node(&mut self, decisions: &[CfDecision]) {
        let cols: Vec<usize> = self
            .x_col
            .iter()
            .flatten()
            .chain(self.z_col.iter().flatten().flatten())
            .copied()
            .collect();
        for c in cols {
            self.lp.set_bounds(c, 0.0, 1.0).expect("unit bounds");
        }
        for d in decisions {
            let (col, val) = match *d {
                CfDecision::Station(v, b) => (self.x_col[v], b),
                CfDecision::Assign(q, v, b) => (self.subs[q].local(v).and_then(|i| self.z_col[q][i]), b),
            };
            let x = if val { 1.0 } else { 0.0 };
            if let Some(c) = col {
                self.lp.set_bounds(c, x, x).expect("fixing");
            }
        }
        self.sol = None;
    }

    fn solve_lp(&mut self) -> LpOutcome {
        let mut sol = self.lp.solve();
        if matches!(sol.status, LpStatus::IterationLimit | LpStatus::NumericalFailure) {
            sol = self.lp.solve_cold();
        }
        let out = match sol.status {
            LpStatus::Optimal => LpOutcome::Optimal(sol.objective),
            LpStatus::Infeasible => LpOutcome::Infeasible,
            _ => LpOutcome::Failed,
        };
        self.sol = Some(sol);
        out
    }

    fn separate(&mut self, _node: &NodeInfo, limited: bool) -> usize {
        let mut added = self.separate_integer();
        if limited && !self.uncapacitated {
            if self.config.fractional_separation {
                added += self.separate_fractional();
            }
            if self.config.lci {
                added += self.separate_lci();
            }
        }
        added
    }

    fn check_integral(&mut self) -> Integrality {
        let xs_integral = self
            .x_col
            .iter()
            .flatten()
            .all(|&c| Self::is_integral(self.value(Some(c))));
        if !xs_integral || !(0..self.subs.len()).all(|q| self.locally_integral(q)) {
            return Integrality::Fractional;
        }
        let mut routes = Vec::with_capacity(self.subs.len());
        for q in 0..self.subs.len() {
            match self.route(q) {
                Some(r) => routes.push(r),
                None => return Integrality::Fractional,
            }
        }
        let open: BTreeSet<NodeId> = self
            .inst
            .stations()
            .filter(|&v| self.value(self.x_col[v]) >= 0.5)
            .collect();
        Integrality::Feasible(Solution::new(self.inst, open, routes))
    }

    fn branch(&mut self) -> Vec<Vec<CfDecision>> {
        let xs = self
            .inst
            .stations()
            .filter(|&v| self.x_col[v].is_some())
            .map(|v| (v, self.value(self.x_col[v])));
        if let Some(v) = most_fractional(xs, INT_TOL) {
            return vec![vec![CfDecision::Station(v, true)], vec![CfDecision::Station(v, false)]];
        }
        let mut zs = Vec::new();
        for (q, sub) in self.subs.iter().enumerate() {
            for i in sub.stations() {
                zs.push(((q, sub.global(i)), self.station_value(q, i)));
            }
        }
        if let Some((q, v)) = most_fractional(zs, INT_TOL) {
            return vec![
                vec![CfDecision::Assign(q, v, true)],
                vec![CfDecision::Assign(q, v, false)],
            ];
        }
        Vec::new()
    }

    fn heuristic(&mut self) -> Option<Solution> {
        if !self.config.heuristic || self.uncapacitated || self.sol.is_none() {
            return None;
        }
        let zbar = |q: usize, v: NodeId| self.subs[q].local(v).map_or(0.0, |i| self.value(self.z_col[q][i]));
        let rec = primal_heuristic_csp(self.inst, &self.subs, &zbar);
        let sol = rec.solution.clone();
        if self.config.record_trace {
            self.trace.heuristic.push(rec);
        }
        sol
    }

    fn round_cap(&self, _is_root: bool) -> usize {
        1
    }
}

fn limits(config: &SolverConfig) -> BnbLimits {
    BnbLimits {
        time_limit: config.time_limit,
        node_limit: config.node_limit,
    }
}

pub(crate) fn infeasible_result(start: Instant, dijkstra_calls: u64) -> SolveResult {
    SolveResult {
        status: SolveStatus::Infeasible,
        solution: None,
        best_bound: f64::INFINITY,
        nodes: 0,
        wall_time: start.elapsed(),
        dijkstra_calls,
        trace: SolveTrace::default(),
    }
}

fn run(instance: &Instance, config: &SolverConfig, uncapacitated: bool) -> SolveResult {
    let start = Instant::now();
    let subs = instance.subgraphs();
    if subs.iter().any(|s| s.is_empty()) {
        return infeasible_result(start, 0);
    }
    let mut model = CfModel::build(instance, config, subs, uncapacitated);
    let out = bnb_run(&mut model, instance, limits(config));
    SolveResult {
        status: out.status,
        solution: out.incumbent,
        best_bound: out.best_bound,
        nodes: out.nodes,
        wall_time: start.elapsed(),
        dijkstra_calls: model.counter.count(),
        trace: model.trace,
    }
}

/// Capacitated cut formulation.
pub fn solve_cf(instance: &Instance, config: &SolverConfig) -> SolveResult {
    run(instance, config, false)
}

/// Uncapacitated cut formulation over station variables only; capacities of
/// `instance` are ignored. Integer separation follows `config.separation`.
pub fn solve_cf_uncapacitated(instance: &Instance, config: &SolverConfig) -> SolveResult {
    let relaxed = instance.with_uniform_capacity(f64::INFINITY);
    run(&relaxed, config, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;
    use crate::network::verify_solution;

    #[test]
    fn single_pair_opens_one_station() {
        let fx = example_network(5.0, &[1.0]);
        let res = solve_cf(&fx.instance, &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        let sol = res.solution.unwrap();
        assert_eq!(sol.objective, 1.0);
        assert!(verify_solution(&fx.instance, &sol).passed());
    }

    #[test]
    fn two_pairs_with_tight_station() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance = fx.instance.with_uniform_capacity(1.0);
        for cfg in [
            SolverConfig::default(),
            SolverConfig {
                heuristic: false,
                lci: false,
                fractional_separation: false,
                ..SolverConfig::default()
            },
        ] {
            let res = solve_cf(&fx.instance, &cfg);
            assert_eq!(res.status, SolveStatus::Optimal);
            assert_eq!(res.objective(), Some(3.0));
        }
    }

    #[test]
    fn root_has_layer_row() {
        let fx = example_network(5.0, &[1.0]);
        let cfg = SolverConfig {
            record_trace: true,
            ..SolverConfig::default()
        };
        let subs = fx.instance.subgraphs();
        let model = CfModel::build(&fx.instance, &cfg, subs, false);
        assert!(model.trace.separators.iter().any(|s| s.stations == vec![fx.a, fx.b]));
    }

    #[test]
    fn uncapacitated_variants_agree() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance.capacity[fx.b] = 1.0;
        let ours = solve_cf_uncapacitated(&fx.instance, &SolverConfig::default());
        let base = solve_cf_uncapacitated(
            &fx.instance,
            &SolverConfig {
                separation: SeparationVariant::Baseline,
                ..SolverConfig::default()
            },
        );
        assert_eq!(ours.objective(), Some(1.0));
        assert_eq!(base.objective(), Some(1.0));
    }
}
