use thiserror::Error;

/// Errors produced by schedule construction, spectral decomposition, and
/// evolution.
#[derive(Debug, Error)]
pub enum AdiabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} outside path domain [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// The spectrum is treated as gapped everywhere; a collision between
    /// adjacent levels is a hard error rather than something we track through.
    #[error("degenerate spectrum: level gap {gap:.3e} below tolerance {tol:.3e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },

    /// Raised by gauge chaining when consecutive frames overlap too little;
    /// the caller is expected to refine the step.
    #[error("gauge step too large: band {band} overlap {overlap:.3e} below 0.5")]
    StepTooLarge { band: usize, overlap: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("verification failed at sample {index} (t = {t}): {what} = {value:.6e}")]
    VerificationFailure {
        index: usize,
        t: f64,
        what: String,
        value: f64,
    },
}

pub type Result<T> = std::result::Result<T, AdiabError>;
