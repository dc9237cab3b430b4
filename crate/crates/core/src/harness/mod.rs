//! Configured Monte-Carlo experiments and their CSV outputs.

mod config;
mod experiments;
mod output;

pub use config::{Experiment, ExperimentConfig, Mode};
pub use experiments::{
    lambda1_at, null_distribution, par_trials, phase_sweep, roc_curve, run_trial, spectrum, Hypothesis, NullSummary,
    PhaseRow, RocCurve, RocPoint, H1_STREAM_OFFSET, NULL_QUANTILES, ROC_GRID_POINTS, ROC_MIN_TRIALS,
};
pub use output::{format_f64, write_null, write_phase, write_roc, write_spectrum};
