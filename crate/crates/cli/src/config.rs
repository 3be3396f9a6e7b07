//! Run configuration. Every key is optional; unknown keys are rejected.

use std::path::PathBuf;

use pairscope::fock::SourceModel;
use pairscope::precision::Scheme;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    /// Photon-number cutoff for sources with unbounded support.
    pub n_max: u32,
    pub source: SourceConfig,
    pub precision_sweep: SweepConfig,
    pub critical: CriticalConfig,
    pub coeffs: CoeffsConfig,
    pub montecarlo: MonteCarloConfig,
    pub scan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rng_seed: 42,
            output_dir: PathBuf::from("out"),
            n_max: 8,
            source: SourceConfig::default(),
            precision_sweep: SweepConfig::default(),
            critical: CriticalConfig::default(),
            coeffs: CoeffsConfig::default(),
            montecarlo: MonteCarloConfig::default(),
            scan: ScanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceConfig {
    #[default]
    IdealPair,
    WeakSpdc {
        beta: f64,
    },
    TwoModeSqueezed {
        beta: f64,
        n_max: Option<u32>,
    },
    Coherent {
        mean_photons: f64,
        #[serde(default = "one")]
        modes: usize,
    },
    MultiMode {
        modes: usize,
        beta: f64,
        n_max: Option<u32>,
    },
}

fn one() -> usize {
    1
}

impl SourceConfig {
    pub fn model(&self, n_max: u32) -> Result<SourceModel, CliError> {
        let model = match *self {
            Self::IdealPair => SourceModel::IdealPair,
            Self::WeakSpdc { beta } => SourceModel::WeakSpdc { beta },
            Self::TwoModeSqueezed { beta, n_max: own } => SourceModel::TwoModeSqueezed {
                beta,
                n_max: own.unwrap_or(n_max),
            },
            Self::Coherent { mean_photons, modes } => SourceModel::Coherent { mean_photons, modes },
            Self::MultiMode {
                modes,
                beta,
                n_max: own,
            } => SourceModel::MultiModeCorrelated {
                modes,
                beta,
                n_max: own.unwrap_or(n_max),
            },
        };
        model.validate().map_err(|e| CliError::Config(format!("source: {e}")))?;
        Ok(model)
    }

    /// Amplitude used for the critical-transmittance marker; an ideal pair
    /// behaves as `β = 1`.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            Self::IdealPair => Some(1.0),
            Self::WeakSpdc { beta } | Self::TwoModeSqueezed { beta, .. } | Self::MultiMode { beta, .. } => {
                Some(beta)
            }
            Self::Coherent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    /// Explicit grid; overrides the range keys when present.
    pub grid: Option<Vec<f64>>,
    pub coherent_mean: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_min: 0.01,
            t_max: 1.0,
            t_step: 0.01,
            grid: None,
            coherent_mean: 1.0,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(g) = &self.grid {
            if g.is_empty() {
                return Err(CliError::Config("precision_sweep.grid is empty".into()));
            }
            return Ok(g.clone());
        }
        let (lo, hi, step) = (self.t_min, self.t_max, self.t_step);
        if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && hi >= lo) {
            return Err(CliError::Config(format!(
                "precision_sweep range t_min={lo} t_max={hi} t_step={step} is invalid"
            )));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        // Rounded to 12 decimals so that e.g. 0.07 is the nearest double to
        // 0.07, not an accumulated 0.07000000000000001.
        Ok((0..=n)
            .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    /// Defaults to the source amplitude.
    pub beta: Option<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub tolerance: f64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self {
            beta: None,
            t_lo: 0.01,
            t_hi: 1.0,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoeffsConfig {
    pub k_max: u32,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self { k_max: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[allow(clippy::enum_variant_names)]
pub enum SchemeName {
    SinglePass,
    DoublePass,
    MultiPass,
}

impl SchemeName {
    pub fn resolve(self, modes: usize) -> Scheme {
        match self {
            Self::SinglePass => Scheme::SinglePass,
            Self::DoublePass => Scheme::DoublePass,
            Self::MultiPass => Scheme::MultiPass(modes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub scheme: SchemeName,
    pub t: f64,
    /// Mean correlated events per dwell.
    pub pairs_mean: f64,
    pub dwells: usize,
    pub replicates: usize,
    pub detector_efficiency: Option<Vec<f64>>,
    pub background: f64,
    /// Also run a single-pass / multi-pass comparison against a `t = 1`
    /// reference with matched photon budgets.
    pub matched: bool,
    pub bootstrap_resamples: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeName::DoublePass,
            t: 0.98,
            pairs_mean: 20.0,
            dwells: 100_000,
            replicates: 10,
            detector_efficiency: None,
            background: 0.0,
            matched: false,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Map file; relative paths are taken from the config file's directory.
    pub map: Option<PathBuf>,
    /// Mean single-pass coincidences per reference pixel.
    pub reference_counts: f64,
    pub analysis_rows: usize,
    pub bootstrap_resamples: usize,
    pub detector_efficiency: Option<Vec<f64>>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            map: None,
            reference_counts: 5000.0,
            analysis_rows: 25,
            bootstrap_resamples: 1000,
            detector_efficiency: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}
