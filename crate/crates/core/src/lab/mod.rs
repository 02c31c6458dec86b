//! Experiment driver: configuration, runs, artifacts and reports.

pub mod config;
pub mod io;
pub mod report;
pub mod runs;

pub use config::{CutoffConfig, ExperimentConfig};
pub use report::{emit_report, ReportOutcome};
pub use runs::{
    classify_energy, operator_at, run_certificate, run_certificate_with, run_classify, run_fit, run_sweep,
    series_from_rows, sweep_at, CertificateOutcome, SweepOutcome,
};

/// Process exit codes of the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const CERTIFICATE_FAILED: i32 = 3;
    pub const CERTIFICATE_VOID: i32 = 4;
}
