//! Shortest paths, time-separators, minimum vertex cuts and constrained
//! shortest paths.

pub mod csp;
pub mod dijkstra;
pub mod mincut;
pub mod separator;

pub use csp::{csp_exact, csp_larac, CostedPath, CspQuery};
pub use dijkstra::{dijkstra, hop_distances, Digraph, DijkstraCounter, Direction, ShortestPaths};
pub use mincut::{fractional_separator_mincut, FlowNetwork};
pub use separator::{
    baseline_time_separator, has_feasible_path_avoiding, hop_layer_separators, integer_separator_candidates,
    integer_time_separator, is_time_separator, minimalize_separator, SeparatorError, TimeSeparator,
};
