use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("order is indeterminate: no nonzero term below the truncation")]
    IndeterminateOrder,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("characteristic equation does not split over Q(i); numeric mode required")]
    SplittingFieldRequired,
    #[error("roots of unity of order {0} are not available in exact mode")]
    RootsOfUnityUnavailable(u64),
    #[error("point is not of type 2")]
    NotType2,
    #[error("point lies outside the closed unit ball")]
    NotInUnitBall,
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid root ball: {0}")]
    InvalidRoot(String),
    #[error("the invariant set is a single point; no ball cover exists")]
    NoCover,
    #[error("a critical branch lies in the invariant set")]
    CriticalInK,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("eigenspace for eigenvalue c has dimension {0}, expected 1")]
    DegenerateEigenspace(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("no preimage in ball {0}")]
    NoPreimageInBall(usize),
    #[error("inadmissible itinerary: {0}")]
    Inadmissible(String),
    #[error("division by c*w^(c-1) is not exact")]
    DivisionObstruction,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
