//! Image SNR between an input (reference) and output (sample) ensemble:
//!
//! `SNR = (⟨O_in⟩ - ⟨O_out⟩) / √(Var(O_in) + Var(O_out))`
//!
//! with means and unbiased variances taken over dwell (pixel) ensembles.
//! Standard errors come from a seeded nonparametric bootstrap.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::{CountRecord, McError, StreamFamily};
use crate::stats::{sample_std_dev, CountStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            resamples: 1000,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrEstimate {
    pub snr: f64,
    pub std_error: f64,
    /// Bootstrap replicates in resample order; replicates whose resampled
    /// variance vanished are stored as NaN.
    pub replicates: Vec<f64>,
    pub input: CountStats,
    pub output: CountStats,
}

/// SNR for two ensembles' summary statistics, `None` when their combined
/// variance is zero.
pub fn snr_value(input: &CountStats, output: &CountStats) -> Option<f64> {
    let var = input.variance + output.variance;
    (var > 0.0).then(|| (input.mean - output.mean) / var.sqrt())
}

/// SNR of the coincidence columns of two count records.
pub fn snr_estimate(
    input: &CountRecord,
    output: &CountRecord,
    bootstrap: &BootstrapConfig,
) -> Result<SnrEstimate, McError> {
    snr_from_counts(input.coincidences(), output.coincidences(), bootstrap)
}

pub fn snr_from_counts(
    input: &[u64],
    output: &[u64],
    bootstrap: &BootstrapConfig,
) -> Result<SnrEstimate, McError> {
    for set in [input, output] {
        if set.len() < 2 {
            return Err(McError::InsufficientDwells(set.len()));
        }
    }
    let in_stats = CountStats::from_counts(input);
    let out_stats = CountStats::from_counts(output);
    let snr = snr_value(&in_stats, &out_stats).ok_or(McError::UndefinedSnr)?;

    let in_hist = Histogram::new(input);
    let out_hist = Histogram::new(output);
    let family = StreamFamily::new(bootstrap.seed, "bootstrap");
    let replicates: Vec<f64> = (0..bootstrap.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = family.stream(b as u64);
            let i = in_hist.resample(&mut rng);
            let o = out_hist.resample(&mut rng);
            snr_value(&i, &o).unwrap_or(f64::NAN)
        })
        .collect();
    let finite: Vec<f64> = replicates.iter().copied().filter(|v| v.is_finite()).collect();
    Ok(SnrEstimate {
        snr,
        std_error: sample_std_dev(&finite),
        replicates,
        input: in_stats,
        output: out_stats,
    })
}

/// Distinct values with multiplicities.
///
/// Resampling `n` draws with replacement is a multinomial over the distinct
/// values, drawn here as conditional binomials; the cost scales with the
/// number of distinct counts rather than with `n`.
struct Histogram {
    n: u64,
    bins: Vec<(u64, u64)>,
}

impl Histogram {
    fn new(values: &[u64]) -> Self {
        let mut map: BTreeMap<u64, u64> = BTreeMap::new();
        for &v in values {
            *map.entry(v).or_insert(0) += 1;
        }
        Self {
            n: values.len() as u64,
            bins: map.into_iter().collect(),
        }
    }

    fn resample<R: Rng>(&self, rng: &mut R) -> CountStats {
        let mut draws_left = self.n;
        let mut weight_left = self.n;
        let (mut s1, mut s2) = (0u128, 0u128);
        for &(value, mult) in &self.bins {
            if draws_left == 0 {
                break;
            }
            let k = if mult == weight_left {
                draws_left
            } else {
                let p = mult as f64 / weight_left as f64;
                Binomial::new(draws_left, p)
                    .expect("probability in [0, 1]")
                    .sample(rng)
            };
            draws_left -= k;
            weight_left -= mult;
            let (v, k) = (u128::from(value), u128::from(k));
            s1 += k * v;
            s2 += k * v * v;
        }
        CountStats::from_sums(u128::from(self.n), s1, s2)
    }
}
