//! Prime sweeps, slope fitting and result emission behind the CLI.

pub mod config;
pub mod emit;
pub mod sweep;

pub use config::{ExperimentConfig, MeasureChoice, Mode, OutputFormat};
pub use emit::{emit_results, parse_results, salem_csv, sweep_csv, ResultsDocument, CSV_HEADER};
pub use sweep::{
    derive_seed, fit_loglog_slope, primes_in_range, run_boundedness, run_salem, run_sharpness,
    salem_check, LogLogFit, SalemRow, ScalingResult, SweepReport, SweepRow, SALEM_CONSTANT,
};
