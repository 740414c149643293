//! Branch-cut-and-price over the path formulation: one column per
//! time-feasible path, rejection columns, lazy linking rows and lifted
//! covers expressed through path incidence.

pub mod branching;
pub mod pricing;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use crate::bnb::{
    bnb_run, most_fractional, BnbLimits, BranchProblem, Integrality, LpOutcome, NodeInfo, PricingOutcome,
};
use crate::cut::heuristic::primal_heuristic_csp;
use crate::cut::infeasible_result;
use crate::cut::lci::{lifted_cover, CoverItem, LiftedCover};
use crate::graph::DijkstraCounter;
use crate::instance::Instance;
use crate::lp::{LpModel, LpSolution, LpStatus, Sense, INT_TOL};
use crate::network::{NodeId, OdSubgraph, Solution};
use crate::solve::{SolveResult, SolveTrace, SolverConfig};

use self::branching::{branch_one_path, branch_two_paths};
use self::pricing::{lagrangian_bound, price_pair, pricing_termination, PairPricing, PricingCertificate, PRICING_TOL};

const VIOLATION_TOL: f64 = 1e-6;
const SATURATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PfDecision {
    Station(NodeId, bool),
    /// Global arc indexes pair `pair` may not use.
    Forbid {
        pair: usize,
        arcs: Vec<usize>,
    },
    /// The rejection column of the pair is fixed to zero.
    NoRejection(usize),
}

#[derive(Debug, Clone)]
struct PathColumn {
    pair: usize,
    /// Local node sequence.
    nodes: Vec<usize>,
    /// Local arcs.
    arcs: Vec<usize>,
    /// Global interior stations.
    stations: Vec<NodeId>,
    col: usize,
}

struct PfModel<'a> {
    inst: &'a Instance,
    config: &'a SolverConfig,
    subs: Vec<OdSubgraph>,
    integral_costs: bool,
    lp: LpModel,
    x_col: Vec<Option<usize>>,
    reject_col: Vec<usize>,
    cover_row: Vec<usize>,
    cap_row: Vec<Option<usize>>,
    link_row: HashMap<(NodeId, usize), usize>,
    lcis: Vec<(LiftedCover, usize)>,
    lci_at: Vec<Vec<usize>>,
    lci_set: HashSet<LiftedCover>,
    columns: Vec<PathColumn>,
    keys: HashSet<(usize, Vec<usize>)>,
    forbidden: Vec<Vec<bool>>,
    closed: Vec<bool>,
    sol: Option<LpSolution>,
    counter: DijkstraCounter,
    trace: SolveTrace,
}

impl<'a> PfModel<'a> {
    fn build(inst: &'a Instance, config: &'a SolverConfig, subs: Vec<OdSubgraph>) -> Self {
        let n = inst.graph.node_count();
        let mut lp = LpModel::new();
        let big_m = 1.0 + inst.total_station_cost();
        let cover_row: Vec<usize> = (0..subs.len())
            .map(|_| lp.add_row(&[], Sense::Eq, 1.0).expect("coverage row"))
            .collect();
        let reject_col = cover_row
            .iter()
            .map(|&r| {
                lp.add_column(big_m, 0.0, f64::INFINITY, &[(r, 1.0)])
                    .expect("rejection")
            })
            .collect();
        let mut total = vec![0.0; n];
        for (q, sub) in subs.iter().enumerate() {
            for i in sub.stations() {
                total[sub.global(i)] += inst.pairs[q].demand;
            }
        }
        let mut x_col = vec![None; n];
        let mut cap_row = vec![None; n];
        for v in inst.stations().filter(|&v| total[v] > 0.0) {
            let row = lp.add_row(&[], Sense::Le, 0.0).expect("capacity row");
            let kappa = inst.capacity[v].min(total[v]);
            x_col[v] = Some(
                lp.add_column(inst.cost[v], 0.0, 1.0, &[(row, -kappa)])
                    .expect("station column"),
            );
            cap_row[v] = Some(row);
        }
        let forbidden = subs.iter().map(|s| vec![false; s.arcs().len()]).collect();
        PfModel {
            inst,
            config,
            integral_costs: inst.integral_costs(),
            subs,
            lp,
            x_col,
            reject_col,
            cover_row,
            cap_row,
            link_row: HashMap::new(),
            lcis: Vec::new(),
            lci_at: vec![Vec::new(); n],
            lci_set: HashSet::new(),
            columns: Vec::new(),
            keys: HashSet::new(),
            forbidden,
            closed: vec![false; n],
            sol: None,
            counter: DijkstraCounter::default(),
            trace: SolveTrace::default(),
        }
    }

    fn value(&self, col: usize) -> f64 {
        self.sol
            .as_ref()
            .and_then(|s| s.primal.get(col).copied())
            .unwrap_or(0.0)
    }

    fn x_value(&self, v: NodeId) -> f64 {
        self.x_col[v].map_or(0.0, |c| self.value(c))
    }

    fn dual(&self, row: usize) -> f64 {
        self.sol.as_ref().map_or(0.0, |s| s.duals[row])
    }

    fn column_allowed(&self, c: &PathColumn) -> bool {
        c.arcs.iter().all(|&a| !self.forbidden[c.pair][a]) && c.stations.iter().all(|&v| !self.closed[v])
    }

    fn add_path(&mut self, q: usize, nodes: Vec<usize>) -> bool {
        if !self.keys.insert((q, nodes.clone())) {
            return false;
        }
        let sub = &self.subs[q];
        let f = self.inst.pairs[q].demand;
        let stations: Vec<NodeId> = nodes
            .iter()
            .filter(|&&i| sub.is_station(i))
            .map(|&i| sub.global(i))
            .collect();
        let arcs = branching::path_arcs(sub, &nodes);
        let mut entries = vec![(self.cover_row[q], 1.0)];
        for &v in &stations {
            entries.push((self.cap_row[v].expect("station in subgraph has capacity row"), f));
            if let Some(&r) = self.link_row.get(&(v, q)) {
                entries.push((r, 1.0));
            }
            for &j in &self.lci_at[v] {
                let (lci, row) = &self.lcis[j];
                let a = lci.coefficient(q);
                if a != 0.0 {
                    entries.push((*row, a));
                }
            }
        }
        let col = self
            .lp
            .add_column(0.0, 0.0, f64::INFINITY, &entries)
            .expect("path column");
        self.columns.push(PathColumn {
            pair: q,
            nodes,
            arcs,
            stations,
            col,
        });
        true
    }

    fn pair_pricing(&self, q: usize) -> PairPricing {
        let sub = &self.subs[q];
        let f = self.inst.pairs[q].demand;
        let node_cost = (0..sub.node_count())
            .map(|i| {
                if !sub.is_station(i) {
                    return 0.0;
                }
                let v = sub.global(i);
                if self.closed[v] {
                    return f64::INFINITY;
                }
                let mu = self.cap_row[v].map_or(0.0, |r| -self.dual(r));
                let pi = self.link_row.get(&(v, q)).map_or(0.0, |&r| -self.dual(r));
                let lambda: f64 = self.lci_at[v]
                    .iter()
                    .map(|&j| {
                        let (lci, row) = &self.lcis[j];
                        lci.coefficient(q) * -self.dual(*row)
                    })
                    .sum();
                (f * mu + pi + lambda).max(0.0)
            })
            .collect();
        PairPricing {
            node_cost,
            sigma: self.dual(self.cover_row[q]),
            forbidden: self.forbidden[q].clone(),
        }
    }

    /// Implied per-pair station values `sum_P delta_v^P y_P`.
    fn implied_z(&self) -> HashMap<(usize, NodeId), f64> {
        let mut z = HashMap::new();
        for c in &self.columns {
            let y = self.value(c.col);
            if y > 0.0 {
                for &v in &c.stations {
                    *z.entry((c.pair, v)).or_insert(0.0) += y;
                }
            }
        }
        z
    }

    fn separate_linking(&mut self) -> usize {
        let z = self.implied_z();
        let mut keys: Vec<(usize, NodeId)> = z.keys().copied().collect();
        keys.sort_unstable();
        let mut added = 0;
        for (q, v) in keys {
            if z[&(q, v)] <= self.x_value(v) + VIOLATION_TOL || self.link_row.contains_key(&(v, q)) {
                continue;
            }
            let mut coefs: Vec<(usize, f64)> = self
                .columns
                .iter()
                .filter(|c| c.pair == q && c.stations.contains(&v))
                .map(|c| (c.col, 1.0))
                .collect();
            coefs.push((self.x_col[v].expect("station column"), -1.0));
            let row = self.lp.add_row(&coefs, Sense::Le, 0.0).expect("linking row");
            self.link_row.insert((v, q), row);
            added += 1;
        }
        added
    }

    fn separate_lci(&mut self) -> usize {
        let z = self.implied_z();
        let n = self.inst.graph.node_count();
        let mut items: Vec<Vec<CoverItem>> = vec![Vec::new(); n];
        for (q, sub) in self.subs.iter().enumerate() {
            for i in sub.stations() {
                let v = sub.global(i);
                items[v].push(CoverItem {
                    pair: q,
                    value: z.get(&(q, v)).copied().unwrap_or(0.0),
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
            if used < kappa * self.x_value(v) - SATURATION_TOL {
                continue;
            }
            let Some(lci) = lifted_cover(v, &items[v], kappa) else {
                continue;
            };
            let lhs = lci.lhs(|q| z.get(&(q, v)).copied().unwrap_or(0.0));
            if lhs <= lci.rhs() + VIOLATION_TOL || self.lci_set.contains(&lci) {
                continue;
            }
            let coefs: Vec<(usize, f64)> = self
                .columns
                .iter()
                .filter(|c| c.stations.contains(&v))
                .filter_map(|c| {
                    let a = lci.coefficient(c.pair);
                    (a != 0.0).then_some((c.col, a))
                })
                .collect();
            let row = self.lp.add_row(&coefs, Sense::Le, lci.rhs()).expect("lci row");
            if self.config.record_trace {
                self.trace.lcis.push(lci.clone());
            }
            self.lci_set.insert(lci.clone());
            self.lci_at[v].push(self.lcis.len());
            self.lcis.push((lci, row));
            added += 1;
        }
        added
    }

    /// Positive columns of a pair as `(value, Some(column index))`, with
    /// `None` for the rejection column, largest first.
    fn support(&self, q: usize) -> Vec<(f64, Option<usize>)> {
        let mut out: Vec<(f64, Option<usize>)> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.pair == q)
            .map(|(k, c)| (self.value(c.col), Some(k)))
            .filter(|&(y, _)| y > INT_TOL)
            .collect();
        let r = self.value(self.reject_col[q]);
        if r > INT_TOL {
            out.push((r, None));
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out
    }

    fn global_arcs(&self, q: usize, local: &[usize]) -> Vec<usize> {
        let mut arcs: Vec<usize> = local.iter().map(|&a| self.subs[q].arc(a).arc).collect();
        arcs.sort_unstable();
        arcs
    }

    fn exact_round(&mut self, node: &NodeInfo, allow_early: bool, rmp: f64) -> PricingOutcome {
        let pricings: Vec<PairPricing> = (0..self.subs.len()).map(|q| self.pair_pricing(q)).collect();
        let mut best = vec![f64::INFINITY; self.subs.len()];
        let mut found = Vec::new();
        for (q, p) in pricings.iter().enumerate() {
            if let Some(path) = price_pair(&self.subs[q], p, true, &self.counter) {
                let rc = p.reduced_cost(&self.subs[q], &path.nodes);
                best[q] = rc;
                if rc < -PRICING_TOL {
                    found.push((q, path.nodes));
                }
            }
        }
        let lagr = lagrangian_bound(rmp, &best);
        let converged = found.is_empty();
        if self.config.record_trace {
            self.trace.pricing.push(PricingCertificate {
                node: node.id,
                pairs: pricings,
                rmp_value: rmp,
                lagrangian: lagr,
                converged,
            });
        }
        let early = allow_early
            && self.config.early_termination
            && !converged
            && pricing_termination(
                rmp,
                Some(lagr),
                node.global_bound,
                Some(node.parent_bound),
                self.integral_costs,
            );
        if early {
            return PricingOutcome {
                added: 0,
                lagrangian: Some(lagr),
                stopped_early: true,
            };
        }
        let added = found
            .into_iter()
            .filter(|(q, nodes)| self.add_path(*q, nodes.clone()))
            .count();
        PricingOutcome {
            added,
            lagrangian: Some(lagr),
            stopped_early: false,
        }
    }
}

impl BranchProblem for PfModel<'_> {
    type Decision = PfDecision;

    fn enter_node(&mut self, decisions: &[PfDecision]) {
        for c in self.x_col.iter().flatten().copied().collect::<Vec<_>>() {
            self.lp.set_bounds(c, 0.0, 1.0).expect("unit bounds");
        }
        for &c in &self.reject_col.clone() {
            self.lp.set_bounds(c, 0.0, f64::INFINITY).expect("rejection bounds");
        }
        self.forbidden
            .iter_mut()
            .for_each(|f| f.iter_mut().for_each(|b| *b = false));
        self.closed.iter_mut().for_each(|b| *b = false);
        for d in decisions {
            match d {
                PfDecision::Station(v, open) => {
                    let x = if *open { 1.0 } else { 0.0 };
                    if let Some(c) = self.x_col[*v] {
                        self.lp.set_bounds(c, x, x).expect("fixing");
                    }
                    if !*open {
                        self.closed[*v] = true;
                    }
                }
                PfDecision::Forbid { pair, arcs } => {
                    let sub = &self.subs[*pair];
                    for (a, sa) in sub.arcs().iter().enumerate() {
                        if arcs.binary_search(&sa.arc).is_ok() {
                            self.forbidden[*pair][a] = true;
                        }
                    }
                }
                PfDecision::NoRejection(q) => {
                    self.lp
                        .set_bounds(self.reject_col[*q], 0.0, 0.0)
                        .expect("rejection fixing");
                }
            }
        }
        for k in 0..self.columns.len() {
            let ub = if self.column_allowed(&self.columns[k]) {
                f64::INFINITY
            } else {
                0.0
            };
            self.lp.set_bounds(self.columns[k].col, 0.0, ub).expect("column bounds");
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

    fn price(&mut self, node: &NodeInfo, allow_early: bool) -> PricingOutcome {
        let Some(rmp) = self.sol.as_ref().map(|s| s.objective) else {
            return PricingOutcome::default();
        };
        let early_i = allow_early
            && self.config.early_termination
            && pricing_termination(
                rmp,
                None,
                node.global_bound,
                Some(node.parent_bound),
                self.integral_costs,
            );
        if self.config.larac && !early_i {
            let mut found = Vec::new();
            for q in 0..self.subs.len() {
                let p = self.pair_pricing(q);
                if let Some(path) = price_pair(&self.subs[q], &p, false, &self.counter) {
                    if p.reduced_cost(&self.subs[q], &path.nodes) < -PRICING_TOL {
                        found.push((q, path.nodes));
                    }
                }
            }
            let added = found
                .into_iter()
                .filter(|(q, nodes)| self.add_path(*q, nodes.clone()))
                .count();
            if added > 0 {
                return PricingOutcome {
                    added,
                    lagrangian: None,
                    stopped_early: false,
                };
            }
        }
        self.exact_round(node, allow_early, rmp)
    }

    fn separate(&mut self, _node: &NodeInfo, limited: bool) -> usize {
        if !limited {
            return 0;
        }
        let mut added = self.separate_linking();
        if self.config.lci {
            added += self.separate_lci();
        }
        added
    }

    fn check_integral(&mut self) -> Integrality {
        let integral = |v: f64| (v - v.round()).abs() <= INT_TOL;
        if !self.x_col.iter().flatten().all(|&c| integral(self.value(c))) {
            return Integrality::Fractional;
        }
        let mut routes = Vec::with_capacity(self.subs.len());
        let mut rejected = false;
        for q in 0..self.subs.len() {
            let support = self.support(q);
            if support.len() != 1 || !integral(support[0].0) {
                return Integrality::Fractional;
            }
            match support[0].1 {
                Some(k) => routes.push(self.subs[q].to_global_path(&self.columns[k].nodes)),
                None => rejected = true,
            }
        }
        if rejected {
            return Integrality::Infeasible;
        }
        let open: BTreeSet<NodeId> = self.inst.stations().filter(|&v| self.x_value(v) >= 0.5).collect();
        Integrality::Feasible(Solution::new(self.inst, open, routes))
    }

    fn branch(&mut self) -> Vec<Vec<PfDecision>> {
        let xs = self
            .inst
            .stations()
            .filter(|&v| self.x_col[v].is_some())
            .map(|v| (v, self.x_value(v)));
        if let Some(v) = most_fractional(xs, INT_TOL) {
            return vec![vec![PfDecision::Station(v, true)], vec![PfDecision::Station(v, false)]];
        }
        let mut pairs: Vec<usize> = (0..self.subs.len()).filter(|&q| self.support(q).len() > 1).collect();
        pairs.sort_by(|&a, &b| {
            self.inst.pairs[b]
                .demand
                .total_cmp(&self.inst.pairs[a].demand)
                .then(a.cmp(&b))
        });
        let Some(&q) = pairs.first() else { return Vec::new() };
        let support = self.support(q);
        let sub = &self.subs[q];
        let forbidden = &self.forbidden[q];
        let forbid = |arcs: &[usize]| PfDecision::Forbid {
            pair: q,
            arcs: self.global_arcs(q, arcs),
        };
        match (support[0].1, support[1].1) {
            (Some(k1), Some(k2)) => {
                let (p, p2) = (&self.columns[k1].nodes, &self.columns[k2].nodes);
                match branch_two_paths(sub, forbidden, p, p2) {
                    Some((a1, a2)) => vec![vec![forbid(&a1)], vec![forbid(&a2)]],
                    None => Vec::new(),
                }
            }
            (Some(k), None) | (None, Some(k)) => {
                let p = &self.columns[k].nodes;
                match branch_one_path(sub, forbidden, p) {
                    Some((a1, a2)) => vec![vec![forbid(&a1)], vec![forbid(&a2)]],
                    None => {
                        let first = branching::path_arcs(sub, p)[0];
                        vec![vec![forbid(&[first])], vec![PfDecision::NoRejection(q)]]
                    }
                }
            }
            (None, None) => Vec::new(),
        }
    }

    fn heuristic(&mut self) -> Option<Solution> {
        if !self.config.heuristic || self.sol.is_none() {
            return None;
        }
        let z = self.implied_z();
        let zbar = |q: usize, v: NodeId| z.get(&(q, v)).copied().unwrap_or(0.0);
        let rec = primal_heuristic_csp(self.inst, &self.subs, &zbar);
        let sol = rec.solution.clone();
        if self.config.record_trace {
            self.trace.heuristic.push(rec);
        }
        sol
    }

    fn round_cap(&self, is_root: bool) -> usize {
        if is_root {
            self.config.root_rounds
        } else {
            1
        }
    }
}

/// Path formulation solved by branch-cut-and-price.
pub fn solve_pf(instance: &Instance, config: &SolverConfig) -> SolveResult {
    let start = Instant::now();
    let subs = instance.subgraphs();
    if subs.iter().any(|s| s.is_empty()) {
        return infeasible_result(start, 0);
    }
    let mut model = PfModel::build(instance, config, subs);
    let limits = BnbLimits {
        time_limit: config.time_limit,
        node_limit: config.node_limit,
    };
    let out = bnb_run(&mut model, instance, limits);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;
    use crate::network::verify_solution;
    use crate::solve::SolveStatus;

    #[test]
    fn single_pair() {
        let fx = example_network(5.0, &[1.0]);
        let res = solve_pf(&fx.instance, &SolverConfig::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective(), Some(1.0));
        assert!(verify_solution(&fx.instance, res.solution.as_ref().unwrap()).passed());
    }

    #[test]
    fn two_pairs_with_tight_station() {
        let mut fx = example_network(5.0, &[1.0, 1.0]);
        fx.instance = fx.instance.with_uniform_capacity(1.0);
        for cfg in [
            SolverConfig::default(),
            SolverConfig {
                heuristic: false,
                larac: false,
                ..SolverConfig::default()
            },
        ] {
            let res = solve_pf(&fx.instance, &cfg);
            assert_eq!(res.status, SolveStatus::Optimal);
            assert_eq!(res.objective(), Some(3.0));
        }
    }

    #[test]
    fn oversized_demand_is_infeasible() {
        let mut fx = example_network(5.0, &[2.0]);
        for v in [fx.a, fx.b, fx.c, fx.d] {
            fx.instance.capacity[v] = 1.0;
        }
        let res = solve_pf(&fx.instance, &SolverConfig::default());
        assert_eq!(res.status, crate::solve::SolveStatus::Infeasible);
        assert!(res.solution.is_none());
    }
}
