//! Batch prediction, calibration, statistics, and reporting.

pub mod batch;
pub mod evaluate;
pub mod report;
pub mod stats;

pub use batch::{batch_predict, read_predictions, write_predictions, BatchOptions, BatchRow, ProfileSet, TableRow};
pub use evaluate::{fit_and_evaluate, repeated_subsampling, EvaluationReport, Observation, SubsamplingOptions};
pub use report::{write_report, ReportRow};
pub use stats::{mean_ci95, pearson, rmse, spearman, Correlation};
