//! Solver configuration, results and the optional audit trace.

use std::time::Duration;

use crate::cut::lci::LiftedCover;
use crate::graph::TimeSeparator;
use crate::network::Solution;
use crate::path::pricing::PricingCertificate;

/// Integer separation routine for the uncapacitated cut formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationVariant {
    /// Two Dijkstra searches locate the reachable inactive stations.
    #[default]
    Ours,
    /// Start from every inactive station and minimalize.
    Baseline,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub lci: bool,
    pub fractional_separation: bool,
    pub heuristic: bool,
    pub larac: bool,
    pub early_termination: bool,
    pub separation: SeparationVariant,
    /// Seed the cut formulation with hop-layer separators at the root.
    pub layer_rows: bool,
    /// Separation rounds allowed at the root; deeper nodes get one.
    pub root_rounds: usize,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: None,
            node_limit: None,
            lci: true,
            fractional_separation: true,
            heuristic: true,
            larac: true,
            early_termination: true,
            separation: SeparationVariant::Ours,
            layer_rows: true,
            root_rounds: 25,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Time or node limit reached, or the LP kernel gave up.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicRecord {
    pub solution: Option<Solution>,
    pub evictions: usize,
    pub guard_hit: bool,
}

/// Everything the solvers emitted, for independent auditing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub separators: Vec<TimeSeparator>,
    pub lcis: Vec<LiftedCover>,
    pub heuristic: Vec<HeuristicRecord>,
    pub pricing: Vec<PricingCertificate>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub best_bound: f64,
    pub nodes: usize,
    pub wall_time: Duration,
    pub dijkstra_calls: u64,
    pub trace: SolveTrace,
}

impl SolveResult {
    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.objective)
    }

    /// `(UB - LB) / UB`, zero when both are zero.
    pub fn gap(&self) -> Option<f64> {
        let ub = self.objective()?;
        if ub.abs() < 1e-12 {
            return Some(if self.best_bound >= -1e-9 { 0.0 } else { f64::INFINITY });
        }
        Some(((ub - self.best_bound) / ub.abs()).max(0.0))
    }
}
