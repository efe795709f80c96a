use thiserror::Error;

/// Errors raised by the solvers and analyses in this crate.
///
/// Every variant has a stable machine-readable name (see [`Error::name`]),
/// which the CLI writes into its error JSON.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("t = {0} is not a member of the time-scale window")]
    NotInTimeScale(f64),
    #[error("window exhausted at t = {0}: no forward jump inside the window")]
    WindowExhausted(f64),
    #[error("window is empty after intersection with [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration bounds reversed: a = {0} > b = {1}")]
    ReversedBounds(f64, f64),
    #[error("not regressive at t = {t}: {detail}")]
    NotRegressive { t: f64, detail: String },
    #[error("transition matrix is singular at t = {0}")]
    SingularTransition(f64),
    #[error("eigenvalue {re}{im:+}i lies outside the Hilger disk for graininess {mu}")]
    UnstableSpectrum { re: f64, im: f64, mu: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("Kronecker system is singular")]
    SingularKroneckerSystem,
    #[error("spectral radius {0} of A + I is not less than one")]
    SpectralRadiusNotLessThanOne(f64),
    #[error("no decay of the improper integrand detected (ratio {0})")]
    NoDecayDetected(f64),
    #[error("window too short: tail bound {tail:e} exceeds {allowed:e}")]
    WindowTooShort { tail: f64, allowed: f64 },
    #[error("P(t) lost positive definiteness at t = {t} (min eigenvalue {min_eig:e})")]
    PositiveDefinitenessLost { t: f64, min_eig: f64 },
    #[error("spot check failed at t = {t}: relative discrepancy {rel:e}")]
    SpotCheckFailed { t: f64, rel: f64 },
    #[error("eigenvalue solver failed to converge")]
    EigenSolverFailure,
    #[error("1 + μ(t)λ = 0 at t = {0}")]
    ZeroRegressivityPoint(f64),
    #[error("grids of the two inputs do not match")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("time scale cannot be extended beyond its window")]
    NotExtendable,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("reduction discrepancy {0:e} exceeds tolerance")]
    ReductionMismatch(f64),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotInTimeScale(_) => "NotInTimeScale",
            Error::WindowExhausted(_) => "WindowExhausted",
            Error::EmptyWindow(..) => "EmptyWindow",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ReversedBounds(..) => "ReversedBounds",
            Error::NotRegressive { .. } => "NotRegressive",
            Error::SingularTransition(_) => "SingularTransition",
            Error::UnstableSpectrum { .. } => "UnstableSpectrum",
            Error::NonSymmetric(_) => "NonSymmetric",
            Error::SingularKroneckerSystem => "SingularKroneckerSystem",
            Error::SpectralRadiusNotLessThanOne(_) => "SpectralRadiusNotLessThanOne",
            Error::NoDecayDetected(_) => "NoDecayDetected",
            Error::WindowTooShort { .. } => "WindowTooShort",
            Error::PositiveDefinitenessLost { .. } => "PositiveDefinitenessLost",
            Error::SpotCheckFailed { .. } => "SpotCheckFailed",
            Error::EigenSolverFailure => "EigenSolverFailure",
            Error::ZeroRegressivityPoint(_) => "ZeroRegressivityPoint",
            Error::GridMismatch => "GridMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotExtendable => "NotExtendable",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::ReductionMismatch(_) => "ReductionMismatch",
        }
    }

    /// Input/validation problems as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotInTimeScale(_)
                | Error::EmptyWindow(..)
                | Error::InvalidParameter(_)
                | Error::ReversedBounds(..)
                | Error::NonSymmetric(_)
                | Error::GridMismatch
                | Error::DimensionMismatch { .. }
                | Error::NotExtendable
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
