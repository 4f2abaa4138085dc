//! Product-of-experts multimodal VAE for generalized zero- and few-shot
//! learning.
//!
//! The crate trains a pair of modality encoders (image features and class
//! attributes) whose diagonal-Gaussian posteriors are fused by a
//! precision-weighted product of experts. Unlabeled auxiliary images join
//! training through a shared image encoder, an indicator head that predicts
//! whether a sample is paired, and an L1 loss on generated pseudo-attributes.
//! Everything runs on a small hand-rolled f64 neural substrate so gradients
//! can be checked against finite differences, and the whole pipeline is
//! deterministic per seed.
//!
//! Modules:
//! - [`nn`]: dense layers, MLPs, Adam, gradient checking
//! - [`poe`]: Gaussian experts, fusion, reparameterization, KL
//! - [`objective`]: loss terms, gating, annealing schedules
//! - [`model`]: the trainable architecture and the training loop
//! - [`data`]: datasets, binary formats, the synthetic benchmark
//! - [`eval`]: latent classifier and GZSL/GFSL metrics

use std::path::PathBuf;

pub mod data;
pub mod nn;
pub mod objective;
pub mod poe;

/// Crate-wide error type.
///
/// [`Error::exit_code`] maps variants onto the process exit codes used by
/// the CLI: 2 for bad arguments or configuration, 3 for data-format and
/// validation problems, 4 for numeric failures (NaN/Inf), 1 otherwise.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: format error: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {detail}")]
    Json { path: PathBuf, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl Error {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 2,
            Error::Format { .. } | Error::Validation(_) | Error::Io { .. } | Error::Json { .. } => 3,
            Error::NonFinite(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format { path: path.into(), detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
