//! Problem instances: network, OD pairs, station costs and capacities.

use thiserror::Error;

use crate::network::{
    build_od_subgraph, shortest_pair_time, NetworkError, NetworkGraph, NodeId, OdPair, OdSubgraph, RangeParams,
    DEFAULT_TIME_TOL,
};

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("pair {pair}: origin must be terminal")]
    OriginNotTerminal { pair: usize },
    #[error("pair {pair}: destination must be terminal")]
    DestNotTerminal { pair: usize },
    #[error("pair {pair}: origin equals destination")]
    SameEndpoints { pair: usize },
    #[error("pair {pair}: node {node} does not exist")]
    UnknownNode { pair: usize, node: NodeId },
    #[error("pair {pair}: demand must be positive, got {value}")]
    InvalidDemand { pair: usize, value: f64 },
    #[error("pair {pair}: time bound must be positive, got {value}")]
    InvalidTimeBound { pair: usize, value: f64 },
    #[error("node {node}: cost must be a nonnegative number, got {value}")]
    InvalidCost { node: NodeId, value: f64 },
    #[error("node {node}: capacity must be nonnegative, got {value}")]
    InvalidCapacity { node: NodeId, value: f64 },
    #[error("expected {expected} per-node values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("deviation lambda must be nonnegative, got {0}")]
    NegativeLambda(f64),
    #[error("pair {pair}: conventional time must be positive, got {value}")]
    InvalidConventionalTime { pair: usize, value: f64 },
}

/// Network plus demands. `cost` and `capacity` are indexed by node id; the
/// entries of terminals are ignored (cost 0, capacity infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: NetworkGraph,
    pub ranges: RangeParams,
    pub pairs: Vec<OdPair>,
    pub cost: Vec<f64>,
    pub capacity: Vec<f64>,
    /// Deviation tolerance the time bounds were derived with, if known.
    pub lambda: Option<f64>,
    pub time_tol: f64,
}

impl Instance {
    pub fn new(
        graph: NetworkGraph,
        ranges: RangeParams,
        pairs: Vec<OdPair>,
        cost: Vec<f64>,
        capacity: Vec<f64>,
    ) -> Result<Self, InstanceError> {
        let mut inst = Instance {
            graph,
            ranges,
            pairs,
            cost,
            capacity,
            lambda: None,
            time_tol: DEFAULT_TIME_TOL,
        };
        for v in inst.graph.terminals().collect::<Vec<_>>() {
            if let Some(c) = inst.cost.get_mut(v) {
                *c = 0.0;
            }
            if let Some(k) = inst.capacity.get_mut(v) {
                *k = f64::INFINITY;
            }
        }
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.graph.node_count();
        for len in [self.cost.len(), self.capacity.len()] {
            if len != n {
                return Err(InstanceError::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        for v in self.graph.stations() {
            let c = self.cost[v];
            if !(c >= 0.0) || !c.is_finite() {
                return Err(InstanceError::InvalidCost { node: v, value: c });
            }
            let k = self.capacity[v];
            if !(k >= 0.0) {
                return Err(InstanceError::InvalidCapacity { node: v, value: k });
            }
        }
        for (q, p) in self.pairs.iter().enumerate() {
            for node in [p.origin, p.dest] {
                if node >= n {
                    return Err(InstanceError::UnknownNode { pair: q, node });
                }
            }
            if self.graph.is_station(p.origin) {
                return Err(InstanceError::OriginNotTerminal { pair: q });
            }
            if self.graph.is_station(p.dest) {
                return Err(InstanceError::DestNotTerminal { pair: q });
            }
            if p.origin == p.dest {
                return Err(InstanceError::SameEndpoints { pair: q });
            }
            if !(p.demand > 0.0) || !p.demand.is_finite() {
                return Err(InstanceError::InvalidDemand {
                    pair: q,
                    value: p.demand,
                });
            }
            if !(p.time_bound > 0.0) {
                return Err(InstanceError::InvalidTimeBound {
                    pair: q,
                    value: p.time_bound,
                });
            }
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(InstanceError::NegativeLambda(l));
            }
        }
        Ok(())
    }

    pub fn stations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.stations()
    }

    pub fn station_count(&self) -> usize {
        self.graph.stations().count()
    }

    /// Cost of opening every station.
    pub fn total_station_cost(&self) -> f64 {
        self.graph.stations().map(|v| self.cost[v]).sum()
    }

    /// Whether every station cost is an integer, which allows rounding lower
    /// bounds up.
    pub fn integral_costs(&self) -> bool {
        self.graph.stations().all(|v| self.cost[v].fract() == 0.0)
    }

    pub fn subgraph(&self, q: usize) -> OdSubgraph {
        build_od_subgraph(&self.graph, q, &self.pairs[q], self.time_tol)
    }

    pub fn subgraphs(&self) -> Vec<OdSubgraph> {
        (0..self.pairs.len()).map(|q| self.subgraph(q)).collect()
    }

    /// Copy with every station capacity set to `kappa`.
    pub fn with_uniform_capacity(&self, kappa: f64) -> Instance {
        let mut out = self.clone();
        for v in self.graph.stations() {
            out.capacity[v] = kappa;
        }
        out
    }

    /// Copy without the pairs that have no time-feasible path; returns the
    /// removed pair indexes.
    pub fn drop_infeasible_pairs(&self) -> (Instance, Vec<usize>) {
        let mut out = self.clone();
        let mut removed = Vec::new();
        out.pairs.clear();
        for (q, p) in self.pairs.iter().enumerate() {
            if shortest_pair_time(&self.graph, p) <= p.time_bound + self.time_tol {
                out.pairs.push(*p);
            } else {
                removed.push(q);
            }
        }
        if !removed.is_empty() {
            log::info!("dropped {} time-infeasible pairs", removed.len());
        }
        (out, removed)
    }

    /// Sets `u_q = (1 + lambda) * T_q` from conventional shortest times.
    pub fn compute_time_bounds(&mut self, lambda: f64, conventional: &[f64]) -> Result<(), InstanceError> {
        if !(lambda >= 0.0) {
            return Err(InstanceError::NegativeLambda(lambda));
        }
        if conventional.len() != self.pairs.len() {
            return Err(InstanceError::LengthMismatch {
                expected: self.pairs.len(),
                found: conventional.len(),
            });
        }
        for (q, &t) in conventional.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(InstanceError::InvalidConventionalTime { pair: q, value: t });
            }
        }
        for (p, &t) in self.pairs.iter_mut().zip(conventional) {
            p.time_bound = (1.0 + lambda) * t;
        }
        self.lambda = Some(lambda);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;

    #[test]
    fn time_bounds_from_lambda() {
        let mut inst = example_network(5.0, &[1.0]).instance;
        inst.compute_time_bounds(0.05, &[100.0]).unwrap();
        assert!((inst.pairs[0].time_bound - 105.0).abs() < 1e-9);
        inst.compute_time_bounds(0.0, &[100.0]).unwrap();
        assert_eq!(inst.pairs[0].time_bound, 100.0);
        assert_eq!(
            inst.compute_time_bounds(-0.1, &[100.0]),
            Err(InstanceError::NegativeLambda(-0.1))
        );
    }

    #[test]
    fn drop_keeps_feasible_and_removes_unreachable() {
        let fx = example_network(5.0, &[1.0]);
        let (same, removed) = fx.instance.drop_infeasible_pairs();
        assert!(removed.is_empty());
        assert_eq!(same.pairs.len(), 1);

        let mut inst = fx.instance.clone();
        inst.pairs.push(OdPair {
            origin: fx.t,
            dest: fx.s,
            demand: 1.0,
            time_bound: 100.0,
        });
        let (kept, removed) = inst.drop_infeasible_pairs();
        assert_eq!(removed, vec![1]);
        assert_eq!(kept.pairs.len(), 1);
    }

    #[test]
    fn origin_must_be_terminal() {
        let fx = example_network(5.0, &[1.0]);
        let inst = &fx.instance;
        let bad = OdPair {
            origin: fx.a,
            dest: fx.t,
            demand: 1.0,
            time_bound: 5.0,
        };
        let err = Instance::new(
            inst.graph.clone(),
            inst.ranges,
            vec![bad],
            inst.cost.clone(),
            inst.capacity.clone(),
        )
        .unwrap_err();
        assert_eq!(err, InstanceError::OriginNotTerminal { pair: 0 });
        assert_eq!(err.to_string(), "pair 0: origin must be terminal");
    }

    #[test]
    fn integral_cost_detection() {
        let mut inst = example_network(5.0, &[1.0]).instance;
        assert!(inst.integral_costs());
        inst.cost[1] = 0.5;
        assert!(!inst.integral_costs());
    }
}
