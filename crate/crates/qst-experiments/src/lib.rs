//! Experiment drivers for spin-chain state transfer.
//!
//! Each experiment reads an [`ExperimentConfig`], returns an [`Outcome`] of
//! named tables plus a JSON summary, and is written to disk as CSV files with
//! a metadata header and a JSON sidecar. Randomness is keyed by
//! `(seed, stream)` only, so results do not depend on the thread count.

pub mod bosonic;
pub mod config;
pub mod dipolar;
pub mod disorder;
pub mod error;
pub mod mirror_verify;
pub mod optimize;
pub mod perturbative;
pub mod stats;
pub mod strong;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{ExpError, Result};
pub use table::{Outcome, ResultTable, RunMetadata};

/// Validates `config` for `kind` and runs the experiment.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<Outcome> {
    config.check_kind(kind)?;
    config.validate()?;
    match kind {
        ExperimentKind::DisorderSweep => disorder::run_disorder_sweep(config),
        ExperimentKind::StrongScan => strong::run_strong_scan(config),
        ExperimentKind::DipolarEd => dipolar::run_dipolar_ed(config),
        ExperimentKind::Perturbative => perturbative::run_perturbative_check(config),
        ExperimentKind::Bosonic => bosonic::run_bosonic_demo(config),
        ExperimentKind::MirrorVerify => mirror_verify::run_mirror_verify(config),
    }
}
