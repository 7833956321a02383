use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("degree {degree} polynomial is not dynamical (need degree >= 2)")]
    DegenerateDegree { degree: usize },

    #[error("root finder failed to converge for target c = {c}")]
    RootFinding { c: Complex64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("history step invariant violated at depth {depth}: residual {residual:e}")]
    InvalidHistory { depth: usize, residual: f64 },

    #[error("branch index {index} out of range (fiber has {available} preimages)")]
    InvalidBranch { index: usize, available: usize },

    #[error("continuation step collapsed at depth {depth} near {location}")]
    Continuation { depth: usize, location: Complex64 },

    #[error("grid resolution too coarse: attracting cycle point {point} lies in a discarded region")]
    Resolution { point: Complex64 },

    #[error("pullback tower failed to converge after {levels} levels (worst residual {residual:e})")]
    TowerDivergence { levels: usize, residual: f64 },

    #[error("coordinate failure: {0}")]
    Coordinate(String),

    #[error("point {point} is outside the annulus")]
    OutsideAnnulus { point: Complex64 },

    #[error("lifting ambiguity at level {level}, parameter {parameter}")]
    LiftAmbiguity { level: usize, parameter: f64 },

    #[error("history never enters the tower region within depth {depth}")]
    DepthInsufficient { depth: usize },

    #[error("singular derivative |p'(gamma)| = {modulus:e} at angle {angle}")]
    SingularDerivative { angle: f64, modulus: f64 },

    #[error("invalid torus point: {0}")]
    InvalidTorusPoint(String),

    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    #[error("invalid component graph: {0}")]
    InvalidGraph(String),

    #[error("invalid document: {0}")]
    Document(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Document(e.to_string())
    }
}
