//! One results row per solve, in a fixed CSV schema.

use std::fmt;

use crate::instance::Instance;
use crate::solve::{SolveResult, SolveStatus};

pub const CSV_HEADER: &str = "formulation,lambda,kappa,time_s,obj,nodes,gap_pct,utilization_pct";

/// Placeholder for values that do not exist, e.g. without a feasible
/// solution.
pub const MISSING: &str = "---";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub formulation: String,
    pub lambda: Option<f64>,
    pub kappa: f64,
    pub time_s: f64,
    pub objective: Option<f64>,
    pub nodes: usize,
    pub gap_pct: Option<f64>,
    pub utilization_pct: Option<f64>,
}

impl ResultRow {
    /// `kappa` is the uniform capacity the instance was solved with.
    pub fn from_result(formulation: &str, instance: &Instance, kappa: f64, result: &SolveResult) -> Self {
        let solution = result.solution.as_ref();
        let gap_pct = match result.status {
            SolveStatus::Infeasible => None,
            SolveStatus::Optimal => solution.map(|_| 0.0),
            SolveStatus::Limit => result.gap().map(|g| 100.0 * g),
        };
        ResultRow {
            formulation: formulation.to_string(),
            lambda: instance.lambda,
            kappa,
            time_s: result.wall_time.as_secs_f64(),
            objective: solution.map(|s| s.objective),
            nodes: result.nodes,
            gap_pct,
            utilization_pct: solution
                .filter(|s| s.open.iter().any(|&v| instance.capacity[v].is_finite()))
                .map(|s| 100.0 * s.mean_utilization(instance)),
        }
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.digits$}"),
        Some(x) if x > 0.0 => "inf".to_string(),
        _ => MISSING.to_string(),
    }
}

impl fmt::Display for ResultRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kappa = if self.kappa.is_finite() {
            format!("{}", self.kappa)
        } else if self.kappa > 0.0 {
            "inf".to_string()
        } else {
            MISSING.to_string()
        };
        let lambda = self.lambda.map_or(MISSING.to_string(), |l| format!("{l}"));
        write!(
            f,
            "{},{},{},{:.3},{},{},{},{}",
            self.formulation,
            lambda,
            kappa,
            self.time_s,
            self.objective.map_or(MISSING.to_string(), |o| format!("{o}")),
            self.nodes,
            opt(self.gap_pct, 2),
            opt(self.utilization_pct, 1)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_network;
    use crate::solve::SolveTrace;
    use std::time::Duration;

    fn result(status: SolveStatus, solution: Option<crate::Solution>) -> SolveResult {
        SolveResult {
            status,
            solution,
            best_bound: 1.0,
            nodes: 3,
            wall_time: Duration::from_millis(1500),
            dijkstra_calls: 0,
            trace: SolveTrace::default(),
        }
    }

    #[test]
    fn infeasible_row_uses_markers() {
        let fx = example_network(5.0, &[1.0]);
        let row = ResultRow::from_result("cf", &fx.instance, 1.0, &result(SolveStatus::Infeasible, None));
        assert_eq!(row.to_string(), "cf,---,1,1.500,---,3,---,---");
    }

    #[test]
    fn optimal_row_has_zero_gap() {
        let fx = example_network(5.0, &[1.0]);
        let inst = fx.instance.with_uniform_capacity(2.0);
        let sol = crate::Solution::new(&inst, [fx.b].into_iter().collect(), vec![vec![fx.s, fx.b, fx.t]]);
        let row = ResultRow::from_result("pf", &inst, 2.0, &result(SolveStatus::Optimal, Some(sol)));
        assert_eq!(row.gap_pct, Some(0.0));
        assert_eq!(row.utilization_pct, Some(50.0));
        assert_eq!(row.to_string(), "pf,---,2,1.500,1,3,0.00,50.0");
        assert_eq!(CSV_HEADER.split(',').count(), row.to_string().split(',').count());
    }
}
