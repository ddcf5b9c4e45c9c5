//! Morris screening, Latin hypercube sampling and deterministic parallel
//! ensembles with per-year envelope statistics.

mod io;
mod lhs;
mod morris;
mod runner;

use thiserror::Error;

pub use io::{read_ensemble, write_envelope_csv, write_indicator_csv};
pub use lhs::{lhs_sample, SampleMatrix};
pub use morris::{morris_screen, MorrisResult};
pub use runner::{
    run_ensemble, sample_and_run, screen_then_range, EnsembleRequest, EnsembleResult, Retained,
    ScreenConfig, Screening, CHUNK_SIZE,
};

/// Milestone years at which indicator values are retained.
pub const MILESTONES: [f64; 3] = [2030.0, 2050.0, 2100.0];
/// Year of the base values used in normalization.
pub const BASE_YEAR: f64 = 2015.0;
/// Realizations per pathway when none is requested.
pub const DEFAULT_REALIZATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("objective failed at {point:?}: {message}")]
    ObjectiveFailure { point: Vec<f64>, message: String },
    #[error("realization {index} failed ({message}); sampled parameters: {}", format_params(.parameters))]
    RealizationFailure {
        index: usize,
        parameters: Vec<(String, f64)>,
        message: String,
    },
    #[error("variable `{0}` is not produced by the model")]
    UnknownVariable(String),
    #[error("year {0} is not on the simulation grid")]
    UnknownYear(f64),
    #[error("malformed ensemble file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_params(params: &[(String, f64)]) -> String {
    params
        .iter()
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}
