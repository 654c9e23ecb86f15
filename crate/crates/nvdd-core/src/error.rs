//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// omega_av = 0: dip periods 2*pi*k/omega_av are undefined.
    #[error("degenerate target: omega_av = 0, dip periods undefined")]
    DegenerateTarget,

    /// Harmonic index must be a positive integer.
    #[error("invalid harmonic k = {0}; k must be >= 1")]
    InvalidHarmonic(i64),

    /// Sequence construction failed validation.
    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),

    /// Time argument outside the sequence period.
    #[error("time {t:.6e} s outside sequence period [0, {period:.6e})")]
    OutOfPeriod { t: f64, period: f64 },

    /// The requested dip kind has a vanishing coupling coefficient at this
    /// harmonic, so no avoided crossing opens there.
    #[error("no {kind} dip at harmonic k = {k}: coupling coefficient is zero")]
    ClosedCrossing { kind: &'static str, k: i64 },

    /// Floquet truncation does not reach the analysis harmonic.
    #[error("Floquet truncation L = {l} too small for harmonic k = {k}")]
    InsufficientTruncation { l: usize, k: i64 },

    /// Configuration file or parameter-set problem.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
