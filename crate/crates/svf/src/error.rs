use thiserror::Error;

/// Errors shared across the geometry, interpolation and reconstruction layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operation requires a non-empty set")]
    EmptySet,

    #[error("sign change near {location:.6} could not be bracketed to tolerance")]
    DegenerateRoot { location: f64 },

    #[error("strip {strip} holds more than one topology-change candidate (sampling too coarse)")]
    AmbiguousPairing { strip: usize },

    #[error("strip {strip}: {got} sample(s) flank the topology change, {needed} required")]
    InsufficientSamples {
        strip: usize,
        needed: usize,
        got: usize,
    },

    #[error("local fits do not intersect inside the widened strip {strip}")]
    NoIntersection { strip: usize },

    #[error("rotated fit has no interior extremum in strip {strip}")]
    NoExtremum { strip: usize },

    #[error("odd boundary-crossing count ({count}) at t = {t:.6}")]
    InconsistentParity { t: f64, count: usize },

    #[error("B-spline degree {0} is not supported")]
    UnsupportedDegree(usize),

    #[error("evaluation point {0:.6} lies outside the admissible domain")]
    OutOfDomain(f64),

    #[error("value grid is incomplete: expected {expected} values, got {got}")]
    IncompleteGrid { expected: usize, got: usize },

    #[error("level-set extraction is only implemented for 2 or 3 free variables, got {0}")]
    DimensionUnsupported(usize),

    #[error("only {got} neighbours inside the weight support, {needed} required")]
    InsufficientNeighbors { needed: usize, got: usize },

    #[error("neighbourhood is rank-deficient; no stable reference plane")]
    DegenerateNeighborhood,

    #[error("every boundary curve of the section was rejected by the density check")]
    AllCurvesUnreliable,

    #[error("curve tangents are near-parallel ({angle_deg:.2} deg apart)")]
    DegenerateTangents { angle_deg: f64 },

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Machine-readable kind tag, used by the CLI's structured stderr output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySet => "EmptySet",
            Error::DegenerateRoot { .. } => "DegenerateRoot",
            Error::AmbiguousPairing { .. } => "AmbiguousPairing",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::NoIntersection { .. } => "NoIntersection",
            Error::NoExtremum { .. } => "NoExtremum",
            Error::InconsistentParity { .. } => "InconsistentParity",
            Error::UnsupportedDegree(_) => "UnsupportedDegree",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::IncompleteGrid { .. } => "IncompleteGrid",
            Error::DimensionUnsupported(_) => "DimensionUnsupported",
            Error::InsufficientNeighbors { .. } => "InsufficientNeighbors",
            Error::DegenerateNeighborhood => "DegenerateNeighborhood",
            Error::AllCurvesUnreliable => "AllCurvesUnreliable",
            Error::DegenerateTangents { .. } => "DegenerateTangents",
            Error::Io(_) => "IoError",
            Error::Parse { .. } => "ParseError",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
