//! Exact photon-number statistics for diagonal multi-mode states.
//!
//! Every observable handled here (photon counting, coincidences, loss) acts
//! diagonally in the Fock basis, so a state is stored as a probability table
//! over occupation tuples rather than as a density matrix. Off-diagonal
//! coherences of the source never reach a measured quantity.

mod distribution;
mod loss;
mod normal_order;
mod observable;
mod source;

pub use distribution::{Occupation, PhotonNumberDistribution, PRUNE_THRESHOLD};
pub use loss::{apply_loss, binomial_pmf, LossNetwork};
pub use normal_order::{normal_order_coefficients, verify_normal_order, MAX_NORMAL_ORDER};
pub use observable::{
    correlation_mean, correlation_second_moment, correlation_second_moment_expanded,
    falling_factorial, mean_photon_number, CorrelationObservable,
};
pub use source::{expand_source, SourceModel};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("mode count mismatch: expected {expected}, got {got}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("occupation {occupation:?} exceeds truncation n_max={n_max}")]
    OccupationOutOfRange { occupation: Vec<u32>, n_max: u32 },
    #[error("probabilities sum to {sum}, outside [1 - deficit, 1] with deficit {deficit}")]
    Normalization { sum: f64, deficit: f64 },
    #[error("observable orders {orders:?} invalid: {reason}")]
    InvalidObservable { orders: Vec<u32>, reason: String },
    #[error("normal-order coefficient requested for k={0}, supported range is 0..={MAX_NORMAL_ORDER}")]
    OrderOutOfRange(u32),
    #[error("mode index {index} out of range for {mode_count} modes")]
    ModeIndex { index: usize, mode_count: usize },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FockError {
    FockError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
