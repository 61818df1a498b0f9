//! Batch front end for the `bufcontour` engine.
//!
//! Each subcommand resolves a [`RunConfig`], calls into the engine and writes
//! plain files: a fixed-layout contour CSV, JSON reports and an optional SVG
//! overlay. Failures map to the exit codes in [`CliError::exit_code`].

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

pub use commands::{run_contour, run_riskcalc, run_sample, run_verify, ContourOutcome, RiskInput, VerifyOutcome};
pub use config::{ModelChoice, ModelSpec, RunConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Engine(#[from] bufcontour::Error),

    #[error("{path}: {message}")]
    File { path: String, message: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bufcontour::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Engine(E::InsufficientTail { .. }) => 3,
            CliError::Engine(E::Geometry(_) | E::InvalidPolygon { .. }) => 4,
            CliError::Engine(E::Parameter(_) | E::Input(_) | E::Domain(_)) => 2,
            CliError::VerificationFailed(_) => 5,
            _ => 1,
        }
    }

    pub(crate) fn file(path: &std::path::Path, message: impl Into<String>) -> Self {
        CliError::File { path: path.display().to_string(), message: message.into() }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
