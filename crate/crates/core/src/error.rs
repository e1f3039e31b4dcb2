use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("computation group {0} is empty")]
    EmptyGroup(usize),
    #[error("sensor {sensor} belongs to more than one computation group")]
    OverlappingGroups { sensor: usize },
    #[error("sensor index {index} out of range for K = {k}")]
    SensorOutOfRange { index: usize, k: usize },
    #[error("channel magnitude of sensor {0} must be positive and finite")]
    NonPositiveChannel(usize),
    #[error("need at least two sensors, got {0}")]
    TooFewSensors(usize),
    #[error("power budget must be positive and finite")]
    NonPositivePower,
    #[error("noise variance must be positive and finite")]
    NonPositiveNoise,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("computation index {0} out of range")]
    InvalidComputationIndex(usize),
    #[error("transmit amplitude of sensor {0} outside [0, sqrt(P)]")]
    OutsideBox(usize),
    #[error("instance carries no channel phases")]
    MissingPhases,
    #[error("two-sum solver needs exactly two groups covering every sensor")]
    NotTwoSumPartition,
    #[error("combinator input out of range")]
    OutOfRange,
    #[error("{0} computations cannot be split onto two chains of at most two")]
    ChainOverloaded(usize),
    #[error("chain carrying computations {0:?} is infeasible")]
    InfeasibleChain([usize; 2]),
    #[error("equalized two-sum program is infeasible (sigma2 above threshold)")]
    Infeasible,
    #[error("no real nonnegative root")]
    NoRealRoot,
    #[error("degenerate denominator in closed-form solution")]
    DegenerateDenominator,
    #[error("multiplier mu inconsistent across free sensors (spread {0:e})")]
    InconsistentMu(f64),
    #[error("no cardinality pair yields a valid KKT point")]
    NoCandidate,
}
