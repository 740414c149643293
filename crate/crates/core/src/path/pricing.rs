//! Column pricing by constrained shortest paths, the Lagrangian bound and
//! the early-termination test.

use crate::graph::{csp_exact, csp_larac, CostedPath, CspQuery, DijkstraCounter};
use crate::network::OdSubgraph;

/// Reduced-cost threshold for adding a column.
pub const PRICING_TOL: f64 = 1e-6;

/// Pricing data of one pair: station costs from the duals (local indexes,
/// infinite for barred stations), the coverage dual and forbidden local arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPricing {
    pub node_cost: Vec<f64>,
    pub sigma: f64,
    pub forbidden: Vec<bool>,
}

impl PairPricing {
    fn query(&self, bound: f64) -> CspQuery<'_> {
        CspQuery {
            node_cost: &self.node_cost,
            forbidden: &self.forbidden,
            bound,
        }
    }

    /// Reduced cost of a local path.
    pub fn reduced_cost(&self, sub: &OdSubgraph, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .filter(|&&i| sub.is_station(i))
            .map(|&i| self.node_cost[i])
            .sum::<f64>()
            - self.sigma
    }
}

/// Snapshot of one exact pricing round at a tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingCertificate {
    pub node: usize,
    pub pairs: Vec<PairPricing>,
    pub rmp_value: f64,
    pub lagrangian: f64,
    /// No column had negative reduced cost.
    pub converged: bool,
}

/// Cheapest-reduced-cost path of one pair, by LARAC or exactly.
pub fn price_pair(
    sub: &OdSubgraph,
    pricing: &PairPricing,
    exact: bool,
    counter: &DijkstraCounter,
) -> Option<CostedPath> {
    if sub.is_empty() {
        return None;
    }
    let q = pricing.query(sub.time_bound);
    if exact {
        csp_exact(sub, &q)
    } else {
        csp_larac(sub, &q, counter)
    }
}

/// `rmp + sum_q min(0, rc_q)` where `rc_q` are the exact per-pair pricing
/// optima (`+inf` when a pair has no admissible path).
pub fn lagrangian_bound(rmp_value: f64, best_reduced_costs: &[f64]) -> f64 {
    rmp_value + best_reduced_costs.iter().map(|&rc| rc.min(0.0)).sum::<f64>()
}

/// Stops pricing when the integer part of the RMP value matches that of the
/// global or parent lower bound, or that of the Lagrangian bound. Only
/// meaningful with integral costs; otherwise always `false`.
pub fn pricing_termination(
    rmp_value: f64,
    lagrangian: Option<f64>,
    global_lb: f64,
    parent_lb: Option<f64>,
    integral_costs: bool,
) -> bool {
    if !integral_costs {
        return false;
    }
    let same = |a: f64, b: f64| a.is_finite() && b.is_finite() && a.floor() == b.floor();
    same(rmp_value, global_lb)
        || parent_lb.is_some_and(|p| same(rmp_value, p))
        || lagrangian.is_some_and(|l| same(rmp_value, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;

    #[test]
    fn termination_examples() {
        assert!(pricing_termination(12.3, Some(12.1), 11.0, Some(11.2), true));
        assert!(!pricing_termination(12.3, None, 11.0, Some(11.2), true));
        assert!(!pricing_termination(12.3, Some(12.1), 12.0, Some(12.2), false));
        assert!(pricing_termination(12.3, None, 12.0, None, true));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(lagrangian_bound(5.0, &[0.3, 1.0]), 5.0);
        assert!((lagrangian_bound(5.0, &[-0.4, 2.0, f64::INFINITY]) - 4.6).abs() < 1e-12);
    }

    #[test]
    fn large_station_dual_diverts_column() {
        let fx = example_network(5.0, &[1.0]);
        let sub = fx.instance.subgraph(0);
        let mut node_cost = vec![0.0; sub.node_count()];
        node_cost[sub.local(fx.b).unwrap()] = 5.0;
        let p = PairPricing {
            node_cost,
            sigma: 1.0,
            forbidden: vec![false; sub.arcs().len()],
        };
        let path = price_pair(&sub, &p, true, &DijkstraCounter::default()).unwrap();
        assert_eq!(sub.to_global_path(&path.nodes), vec![fx.s, fx.a, fx.d, fx.t]);
        assert!((p.reduced_cost(&sub, &path.nodes) + 1.0).abs() < 1e-12);
    }
}
