use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiseError {
    #[error("no data supplied")]
    EmptyData,
    #[error("time frame is empty: left {left} is not below right {right}")]
    EmptyFrame { left: f64, right: f64 },
    #[error("invalid time frame: {0}")]
    InvalidFrame(String),
    #[error("negative time {time} for individual {id}")]
    NegativeTime { id: String, time: f64 },
    #[error("non-finite time for individual {id}")]
    NonFiniteTime { id: String },
    #[error("status must be 0 or 1, got {status} for individual {id}")]
    InvalidStatus { id: String, status: u8 },
    #[error("individual {id} reports the event at {event_time} but not at the later time {later_time}")]
    MonotonicityViolation {
        id: String,
        event_time: f64,
        later_time: f64,
    },
    #[error("invalid censored interval ({left}, {right}): {reason}")]
    InvalidInterval {
        left: f64,
        right: f64,
        reason: &'static str,
    },
    #[error("censored interval ({left}, {right}) contains no support interval")]
    NoFeasibleSupport { left: f64, right: f64 },
    #[error("grid step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("bandwidth must be non-negative, got {0}")]
    NegativeBandwidth(f64),
    #[error("turning point count needs at least 3 bins, got {0}")]
    TooFewBins(usize),
    #[error("observation {index} ({left}, {right}) has zero likelihood under the density")]
    ZeroLikelihoodObservation { index: usize, left: f64, right: f64 },
    #[error("truncation probability must lie in (0, 1], got {0}")]
    InvalidTruncationProbability(f64),
    #[error("density is degenerate: {0}")]
    DegenerateDensity(&'static str),
    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizerConfig(String),
    #[error("interval ({left}, {right}) covers no bins of the fitted frame")]
    EmptyInterval { left: f64, right: f64 },
    #[error("bootstrap needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("all bootstrap replicates failed")]
    BootstrapFailed,
    #[error("{excluded} of {requested} bootstrap replicates failed")]
    TooManyFailedReplicates { excluded: usize, requested: usize },
    #[error("prevalence must be positive")]
    ZeroPrevalence,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid scenario configuration: field `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("observation counts are required for the observation-count penalty")]
    MissingObservationCounts,
    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<SiseError>,
    },
}

pub type Result<T> = std::result::Result<T, SiseError>;
