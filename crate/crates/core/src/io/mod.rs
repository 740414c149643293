//! Instance and solution documents, synthetic instances, result rows.

pub mod format;
pub mod generator;
pub mod report;

pub use format::{parse_instance, write_instance, write_solution, FormatError, SolutionDoc};
pub use generator::{generate_instance, GeneratorConfig, GeneratorError};
pub use report::{ResultRow, CSV_HEADER, MISSING};
