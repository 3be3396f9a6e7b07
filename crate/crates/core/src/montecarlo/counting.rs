use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use super::{McError, StreamFamily};
use crate::fock::SourceModel;
use crate::precision::SchemeConfig;
use crate::stats::CountStats;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceModel,
    pub scheme: SchemeConfig,
    /// Mean number of correlated events generated per dwell window.
    pub pairs_mean_per_dwell: f64,
    pub dwells: usize,
    pub rng_seed: u64,
    /// Per-mode detection efficiency, multiplied into the apparatus transmittance.
    pub detector_efficiency: Vec<f64>,
    /// Mean uncorrelated background clicks per dwell added to every singles
    /// channel. Coincidences are unaffected.
    pub background_singles_mean: f64,
}

impl ExperimentConfig {
    pub fn new(
        source: SourceModel,
        scheme: SchemeConfig,
        pairs_mean_per_dwell: f64,
        dwells: usize,
        rng_seed: u64,
    ) -> Result<Self, McError> {
        let modes = source.mode_count();
        let cfg = Self {
            source,
            scheme,
            pairs_mean_per_dwell,
            dwells,
            rng_seed,
            detector_efficiency: vec![1.0; modes],
            background_singles_mean: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_detector_efficiency(mut self, efficiency: Vec<f64>) -> Result<Self, McError> {
        self.detector_efficiency = efficiency;
        self.validate()?;
        Ok(self)
    }

    pub fn with_background(mut self, mean: f64) -> Result<Self, McError> {
        self.background_singles_mean = mean;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sample_t(&self, sample_t: f64) -> Self {
        Self {
            scheme: self.scheme.with_sample_t(sample_t),
            ..self.clone()
        }
    }

    pub fn with_pairs_mean(&self, pairs_mean_per_dwell: f64) -> Self {
        Self {
            pairs_mean_per_dwell,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        self.source.validate()?;
        match self.source {
            SourceModel::IdealPair
            | SourceModel::WeakSpdc { .. }
            | SourceModel::MultiModeCorrelated { .. } => {}
            _ => {
                return Err(McError::InvalidConfig(
                    "counting simulation supports correlated one-photon-per-mode sources only"
                        .into(),
                ))
            }
        }
        let modes = self.mode_count();
        if modes > 16 {
            return Err(McError::InvalidConfig(format!("{modes} modes is too many to simulate")));
        }
        self.scheme.validate(modes)?;
        if !(self.pairs_mean_per_dwell.is_finite() && self.pairs_mean_per_dwell > 0.0) {
            return Err(McError::InvalidConfig(format!(
                "pairs_mean_per_dwell {} must be positive",
                self.pairs_mean_per_dwell
            )));
        }
        if self.dwells < 2 {
            return Err(McError::InsufficientDwells(self.dwells));
        }
        if self.detector_efficiency.len() != modes
            || self
                .detector_efficiency
                .iter()
                .any(|e| !(e.is_finite() && *e > 0.0 && *e <= 1.0))
        {
            return Err(McError::InvalidConfig(format!(
                "detector efficiency {:?} must have {modes} entries in (0, 1]",
                self.detector_efficiency
            )));
        }
        if !(self.background_singles_mean.is_finite() && self.background_singles_mean >= 0.0) {
            return Err(McError::InvalidConfig(format!(
                "background mean {} must be non-negative",
                self.background_singles_mean
            )));
        }
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        self.source.mode_count()
    }

    /// Sample × apparatus × detector transmittance per mode.
    pub fn mode_transmittances(&self) -> Vec<f64> {
        self.scheme
            .mode_transmittances(self.mode_count())
            .iter()
            .zip(&self.detector_efficiency)
            .map(|(t, e)| t * e)
            .collect()
    }

    /// Modes that must click for a coincidence (`k_i ≥ 1`).
    pub fn required_modes(&self) -> Vec<usize> {
        self.scheme
            .orders
            .orders()
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Photons launched onto the sample by one event.
    pub fn photons_on_sample_per_event(&self) -> usize {
        self.scheme.sample_modes(self.mode_count()).len()
    }

    /// Expected photons launched onto the sample over the whole run.
    pub fn launched_photons(&self) -> f64 {
        self.pairs_mean_per_dwell * self.dwells as f64 * self.photons_on_sample_per_event() as f64
    }
}

/// Per-dwell counts. `singles[mode][dwell]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    coincidences: Vec<u64>,
    singles: Vec<Vec<u64>>,
}

impl CountRecord {
    pub fn from_parts(coincidences: Vec<u64>, singles: Vec<Vec<u64>>) -> Result<Self, McError> {
        if singles.is_empty() || singles.iter().any(|s| s.len() != coincidences.len()) {
            return Err(McError::InvalidConfig(
                "singles columns must match the coincidence column".into(),
            ));
        }
        Ok(Self {
            coincidences,
            singles,
        })
    }

    pub fn dwells(&self) -> usize {
        self.coincidences.len()
    }

    pub fn mode_count(&self) -> usize {
        self.singles.len()
    }

    pub fn coincidences(&self) -> &[u64] {
        &self.coincidences
    }

    pub fn singles(&self, mode: usize) -> &[u64] {
        &self.singles[mode]
    }

    pub fn coincidence_stats(&self) -> CountStats {
        CountStats::from_counts(&self.coincidences)
    }

    pub fn singles_stats(&self, mode: usize) -> CountStats {
        CountStats::from_counts(&self.singles[mode])
    }
}

/// Draws the counts of one dwell window at fixed transmittances.
///
/// Survival patterns of an event's photons are multinomially distributed
/// over the `2^M` subsets of modes; the pattern counts are drawn as a chain
/// of conditional binomials, which has the same law as per-photon Bernoulli
/// trials.
#[derive(Debug, Clone)]
pub struct DwellSampler {
    events: Poisson<f64>,
    patterns: Vec<(u32, f64)>,
    required_mask: u32,
    mode_count: usize,
    background: Option<Poisson<f64>>,
}

impl DwellSampler {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, McError> {
        cfg.validate()?;
        let t = cfg.mode_transmittances();
        let mode_count = t.len();
        let patterns = (0u32..(1 << mode_count))
            .map(|mask| {
                let p: f64 = t
                    .iter()
                    .enumerate()
                    .map(|(i, ti)| if mask & (1 << i) != 0 { *ti } else { 1.0 - ti })
                    .product();
                (mask, p)
            })
            .filter(|&(_, p)| p > 0.0)
            .collect();
        let required_mask = cfg.required_modes().iter().fold(0u32, |m, &i| m | (1 << i));
        let events = Poisson::new(cfg.pairs_mean_per_dwell)
            .map_err(|e| McError::InvalidConfig(format!("pair rate: {e}")))?;
        let background = if cfg.background_singles_mean > 0.0 {
            Some(
                Poisson::new(cfg.background_singles_mean)
                    .map_err(|e| McError::InvalidConfig(format!("background rate: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            events,
            patterns,
            required_mask,
            mode_count,
            background,
        })
    }

    /// Returns the coincidence count and fills `singles` (one entry per mode).
    pub fn sample<R: Rng>(&self, rng: &mut R, singles: &mut [u64]) -> u64 {
        singles.iter_mut().for_each(|s| *s = 0);
        let mut remaining = self.events.sample(rng) as u64;
        let mut mass = 1.0;
        let mut coincidences = 0;
        let last = self.patterns.len().saturating_sub(1);
        for (idx, &(mask, p)) in self.patterns.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let count = if idx == last {
                remaining
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                mass -= p;
                Binomial::new(remaining, q)
                    .expect("probability clamped to [0, 1]")
                    .sample(rng)
            };
            remaining -= count;
            if mask & self.required_mask == self.required_mask {
                coincidences += count;
            }
            for (i, s) in singles.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    *s += count;
                }
            }
        }
        if let Some(bg) = &self.background {
            for s in singles.iter_mut() {
                *s += bg.sample(rng) as u64;
            }
        }
        coincidences
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }
}

/// Runs `dwells` independent windows; dwell `i` draws from stream `i`.
pub(crate) fn simulate<'s, F>(
    dwells: usize,
    mode_count: usize,
    family: &StreamFamily,
    sampler_for: F,
) -> CountRecord
where
    F: Fn(usize) -> &'s DwellSampler + Sync,
{
    let rows: Vec<(u64, Vec<u64>)> = (0..dwells)
        .into_par_iter()
        .map(|i| {
            let mut rng = family.stream(i as u64);
            let mut singles = vec![0u64; mode_count];
            let c = sampler_for(i).sample(&mut rng, &mut singles);
            (c, singles)
        })
        .collect();
    let mut coincidences = Vec::with_capacity(dwells);
    let mut singles = vec![Vec::with_capacity(dwells); mode_count];
    for (c, s) in rows {
        coincidences.push(c);
        for (col, v) in singles.iter_mut().zip(s) {
            col.push(v);
        }
    }
    CountRecord {
        coincidences,
        singles,
    }
}

/// Simulates `cfg.dwells` dwell windows. Bit-identical for a given config and
/// seed, independent of the rayon thread count.
pub fn run_counting(cfg: &ExperimentConfig) -> Result<CountRecord, McError> {
    let sampler = DwellSampler::new(cfg)?;
    let family = StreamFamily::new(cfg.rng_seed, "counting");
    Ok(simulate(cfg.dwells, cfg.mode_count(), &family, |_| &sampler))
}
