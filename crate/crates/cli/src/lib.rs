//! Batch driver for bilinear feedback simulations and stability
//! certificates: configuration parsing, experiment orchestration, and CSV
//! emission. See the binary in `main.rs` for the command-line surface.

// Validation uses `!(x > 0.0)` so that NaN is rejected with nonpositives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvout;
pub mod runner;

/// Errors mapped to process exit codes: 2 configuration, 3 certificate
/// violation, 4 fixed-point divergence.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    CertificateViolated,
    PicardFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::CertificateViolated => 3,
            CliError::PicardFailed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::CertificateViolated => write!(f, "certificate violated"),
            CliError::PicardFailed(msg) => write!(f, "fixed-point iteration failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
