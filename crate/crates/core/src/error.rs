use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 1 or 2)")]
    InvalidDimension(usize),
    #[error("resolution {0} is too small (need at least 2 points per axis)")]
    InvalidResolution(usize),
    #[error("invalid domain side length {0}")]
    InvalidSide(f64),
    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("base point is {distance} from the reference sheet, at or beyond the injectivity radius {inj}")]
    AmbiguousLift { distance: f64, inj: f64 },
    #[error("deck element {0} does not belong to the deck group")]
    InvalidDeckElement(String),
    #[error("field has no values")]
    EmptyField,
    #[error("field has {got} values but the domain has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value at index {0} is not a valid point of the target space")]
    InvalidPoint(usize),
    #[error("operation requires a one-dimensional interval domain")]
    NotOneDimensional,
    #[error("sigma = {sigma} must lie in (0, s) with s = {s}")]
    BadSigma { sigma: f64, s: f64 },
    #[error("step {step} has base distance {distance}, not below the injectivity radius {inj}")]
    StepTooLarge { step: usize, distance: f64, inj: f64 },
    #[error("grid edge ({from}, {to}) has base distance {distance}, not below the injectivity radius {inj}")]
    EdgeTooLarge { from: usize, to: usize, distance: f64, inj: f64 },
    #[error("lifting does not close up around a grid cycle (defect {residual})")]
    HolonomyObstruction { cycle: Vec<usize>, residual: f64 },
    #[error("fields do not project to the same base field (defect {0})")]
    ProjectionMismatch(f64),
    #[error("operation requires a real-valued field")]
    NonRealField,
    #[error("fields live on different domains or target spaces")]
    DomainMismatch,
    #[error("sp = {0} must exceed 1")]
    SubcriticalExponent(f64),
    #[error("operation requires a convex domain (interval or cube)")]
    NotConvexDomain,
    #[error("eta = {0} must lie in (0, 1)")]
    BadEta(f64),
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("exponent condition violated: {0}")]
    ExponentConditionViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable variant name, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::InvalidResolution(_) => "InvalidResolution",
            Error::InvalidSide(_) => "InvalidSide",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::AmbiguousLift { .. } => "AmbiguousLift",
            Error::InvalidDeckElement(_) => "InvalidDeckElement",
            Error::EmptyField => "EmptyField",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvalidPoint(_) => "InvalidPoint",
            Error::NotOneDimensional => "NotOneDimensional",
            Error::BadSigma { .. } => "BadSigma",
            Error::StepTooLarge { .. } | Error::EdgeTooLarge { .. } => "StepTooLarge",
            Error::HolonomyObstruction { .. } => "HolonomyObstruction",
            Error::ProjectionMismatch(_) => "ProjectionMismatch",
            Error::NonRealField => "NonRealField",
            Error::DomainMismatch => "DomainMismatch",
            Error::SubcriticalExponent(_) => "SubcriticalExponent",
            Error::NotConvexDomain => "NotConvexDomain",
            Error::BadEta(_) => "BadEta",
            Error::ExponentOutOfRange(_) => "ExponentOutOfRange",
            Error::ExponentConditionViolated(_) => "ExponentConditionViolated",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
