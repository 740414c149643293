//! Exact solvers for capacitated refueling station location with routing.
//!
//! Two interchangeable algorithms share one LP kernel and one
//! branch-and-bound driver: branch-and-cut over time-separator rows
//! ([`cut`]) and branch-cut-and-price over path columns ([`path`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bnb;
pub mod cut;
pub mod fixtures;
pub mod graph;
pub mod instance;
pub mod io;
pub mod lp;
pub mod network;
pub mod oracle;
pub mod path;
pub mod solve;

pub use cut::{solve_cf, solve_cf_uncapacitated};
pub use instance::{Instance, InstanceError};
pub use network::{verify_solution, NodeId, OdPair, Solution, Verdict, Violation};
pub use oracle::brute_force_oracle;
pub use path::solve_pf;
pub use solve::{SeparationVariant, SolveResult, SolveStatus, SolverConfig};
