use thiserror::Error;

/// Errors produced by state construction, channel evaluation, resonance
/// extraction, Fisher-information routines, and sweeps.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Quality-factor search found no interior transmission maximum.
    #[error("no resonance: {0}")]
    NoResonance(String),

    /// A half-maximum crossing is not bracketed inside the search window.
    #[error("window too narrow: {0}")]
    WindowTooNarrow(String),

    /// eta = 0 with a nonzero transmissivity gradient: the eta'^2/(4 eta)
    /// term of the coherent QFI diverges.
    #[error("singular loss point: {0}")]
    SingularLoss(String),

    #[error("ill-conditioned state: {0}")]
    IllConditionedState(String),

    /// Measured distribution carries no usable statistics (zero variance,
    /// dark detectors).
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    /// Linearized (phi, eta) left the physical range close enough to the
    /// working point that finite differences are meaningless.
    #[error("linearization invalid: {0}")]
    LinearizationInvalid(String),

    /// Zero (or negative) information: the Cramer-Rao bound is infinite.
    /// Distinct from numeric errors so callers can treat it as data.
    #[error("unbounded variance: quantum Fisher information is not positive")]
    UnboundedVariance,

    /// Fock-space truncation leaks more population than tolerated.
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("sweep failed: {0}")]
    SweepFailed(String),

    /// Requested column absent from every record.
    #[error("no data: {0}")]
    NoData(String),

    /// Text-format parse failure; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
