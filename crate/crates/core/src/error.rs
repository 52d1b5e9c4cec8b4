//! Error taxonomy shared by every module.
//!
//! The variants map onto the CLI exit codes: `InvalidParam` and I/O problems
//! are usage errors (exit 1), `NonConvergence` and `Stabilization` are solver
//! failures (exit 2), `Domain`, `Resolution` and `Fit` are precondition
//! failures (exit 3).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed a parameter outside its contract
    /// (grid size not a power of two, s outside (0.05, 0.95), ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A point or field value left the mathematical domain of an operation
    /// (polar sample outside the cell, negative input to the fixed-point map).
    #[error("domain error: {0}")]
    Domain(String),

    /// The grid cannot resolve the requested diagnostic, e.g. the near-origin
    /// comparison region `sqrt(eps)/(-ln eps)` spans too few cells.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Iteration budget exhausted before the residual target. The residual
    /// history is preserved so callers can report or plot the stall.
    #[error("no convergence after {iterations} iterations (residual {final_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        final_residual: f64,
        history: Vec<f64>,
    },

    /// The damped iteration left the positive cone and clamping could not
    /// stabilize it.
    #[error("stabilization failure at iteration {iteration}: {detail}")]
    Stabilization { iteration: usize, detail: String },

    /// A bracketing or root-finding stage failed; carries the final bracket.
    #[error("bracketing failure: {0}")]
    Bracket(String),

    /// A regression/fit did not meet its preconditions (too few usable
    /// sample radii, degenerate spread, ...).
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed field file or sidecar.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
