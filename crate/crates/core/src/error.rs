use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // metric construction
    #[error("matrix is not square or does not match the {labels} labels")]
    NonSquare { labels: usize },
    #[error("entries ({i},{j}) and ({j},{i}) differ by {amount}")]
    Asymmetric { i: usize, j: usize, amount: f64 },
    #[error("entry ({i},{j}) is negative or not finite")]
    NegativeEntry { i: usize, j: usize },
    #[error("diagonal entry {i} is not zero")]
    NonZeroDiagonal { i: usize },
    #[error("distinct points {i} and {j} are at distance zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality fails at ({i},{j},{k}) by {amount}")]
    TriangleViolation { i: usize, j: usize, k: usize, amount: f64 },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("subset must contain at least one index")]
    EmptySubset,

    // four-point analysis
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("bracket [{lo}, {hi}] does not straddle the feasibility threshold")]
    BracketDoesNotStraddle { lo: f64, hi: f64 },
    #[error("lemma inputs must be nonnegative")]
    NegativeInput,

    // boundary metric
    #[error("boundary sample is empty")]
    EmptyBoundary,
    #[error("point lies on boundary point {boundary}")]
    PointOnBoundary { boundary: String },
    #[error("interior point `{0}` is duplicated")]
    DuplicatePoint(String),
    #[error("R must be positive, got {0}")]
    NonPositiveR(f64),

    // model spaces
    #[error("point violates the model constraint (residual {residual})")]
    ConstraintViolation { residual: f64 },
    #[error("direction is not a unit tangent vector (residual {residual})")]
    NonUnitDirection { residual: f64 },
    #[error("points coincide")]
    CoincidentPoints,
    #[error("points are antipodal")]
    AntipodalPoints,
    #[error("parameter {t} outside [-{r}, {r}]")]
    ParameterOutOfRange { t: f64, r: f64 },
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model space: {0}")]
    InvalidSpace(String),

    // sharpness
    #[error("invalid sharpness configuration: {0}")]
    InvalidConfig(String),

    // io
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Malformed input as opposed to a well-formed input that fails a check.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Io(_) | Error::NonSquare { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
