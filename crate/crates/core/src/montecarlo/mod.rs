//! Seeded simulation of photon-pair counting experiments.
//!
//! Each dwell window generates a Poisson number of correlated photon events
//! (one photon per source mode). Photons survive their mode's total
//! transmittance independently, and a coincidence is recorded for an event
//! whose photons reach every mode carrying a correlation order.

mod counting;
mod report;
mod resource;
mod rng;
mod snr;

pub use counting::{run_counting, CountRecord, DwellSampler, ExperimentConfig};
pub(crate) use counting::simulate;
pub use report::{analytic_counts, mc_vs_analytic_report, AnalyticCounts, ConvergenceRow, ConvergenceTable};
pub use resource::{resource_matched_pair, MatchedPair, RESOURCE_MATCH_TOLERANCE};
pub use rng::StreamFamily;
pub use snr::{snr_estimate, snr_from_counts, snr_value, BootstrapConfig, SnrEstimate};

use thiserror::Error;

use crate::fock::FockError;
use crate::precision::PrecisionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("need at least 2 dwells per ensemble, got {0}")]
    InsufficientDwells(usize),
    #[error("combined variance is zero; SNR undefined")]
    UndefinedSnr,
    #[error("resource matching impossible: {0}")]
    ResourceMismatch(String),
}
