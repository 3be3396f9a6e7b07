//! Photon-number statistics, estimation precision and Monte Carlo scan
//! simulation for absorption measurements with correlated photon pairs.
//!
//! - [`fock`]: exact diagonal-state engine (sources, loss, correlation moments).
//! - [`precision`]: normalized transmittance precision for single-, double- and
//!   multi-pass illumination, closed forms and the critical transmittance.
//! - [`montecarlo`]: seeded counting experiments, SNR with bootstrap errors,
//!   resource matching and convergence reports.
//! - [`scan`]: raster scans of region-labeled transmittance maps.
//! - [`io`]: CSV and PGM writers for every table the crate produces.

pub mod fock;
pub mod io;
pub mod montecarlo;
pub mod precision;
pub mod scan;
pub mod stats;
