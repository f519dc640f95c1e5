use thiserror::Error;

/// Errors from the analytic FEC model and the link planner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("FEC code rate {0} is outside (0, 1]")]
    InvalidRate(f64),
    #[error("{what} = {value} is not a probability")]
    InvalidProbability { what: &'static str, value: f64 },
    #[error("generation size and symbol size must be positive")]
    EmptyGeneration,
    #[error("transmission rate must be positive")]
    ZeroRate,
    #[error("{what} = {value} m must be positive")]
    InvalidDistance { what: &'static str, value: f64 },
    #[error(
        "auxiliary distance {aux_distance} m violates the limit {limit} m for channel {channel}"
    )]
    DistanceLimitViolated {
        channel: usize,
        aux_distance: f64,
        limit: f64,
    },
    #[error("channels differ in {0}; the total auxiliary rate needs a homogeneous configuration")]
    HeterogeneousConfig(&'static str),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("at least one channel is required")]
    NoChannels,
    #[error("channel {channel}: main/aux arrival mismatch {relative} exceeds tolerance")]
    BalanceViolated { channel: usize, relative: f64 },
}
