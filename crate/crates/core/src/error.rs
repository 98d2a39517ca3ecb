use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range for a space with {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    /// Endpoints are conjugate/antipodal, or coincide, on the model.
    #[error("no unique minimizing geodesic: {0}")]
    NoUniqueGeodesic(String),

    #[error("resolution {resolution} too small: cell size {cell:.6} exceeds half the injectivity radius {inj:.6}")]
    ResolutionTooSmall { resolution: usize, cell: f64, inj: f64 },

    #[error("space has no adjacency; the Witten operator needs mesh edges")]
    MissingAdjacency,

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    /// Heat-flowed measures transport at zero cost, so `log(W/d)` is undefined.
    #[error("measures coalesced at t = {t}: W_t = 0")]
    Coalesced { t: f64 },

    #[error("entropic regularization {epsilon:e} below the representable floor; use epsilon >= {floor:e}")]
    EpsilonTooSmall { epsilon: f64, floor: f64 },

    /// The isometry search explored more nodes than allowed.
    #[error("budget exceeded after {explored} search nodes ({} isometries certified so far)", .partial.len())]
    BudgetExceeded { explored: u64, partial: Vec<Vec<usize>> },

    #[error("centers do not form an a-cover: point {point} is {distance} from the nearest center (a = {a})")]
    NotACover { point: usize, distance: f64, a: f64 },

    #[error("missing explicit input `{0}`: this constant is not computable and must be supplied")]
    MissingInput(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Internal failure of a numerical routine; indicates a bug or a pathological input.
    #[error("internal solver error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
