//! Period-matrix documents, example generators and job reports.

mod document;
mod examples;
mod report;

pub use document::{parse_document, parse_period_matrix, serialize_period_matrix, PeriodMatrixDocument, ASYMMETRY_TOL};
pub use examples::{generate_example, random_siegel, ExampleKind};
pub use report::{CheckResult, ErrorReport, JobReport, EXIT_CHECK_FAILED, EXIT_INVALID_INPUT, EXIT_PASS};
