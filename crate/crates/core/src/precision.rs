//! Normalized transmittance-estimation precision.
//!
//! For an observable `O` measured after the sample,
//!
//! `Δt = √R · √⟨ΔO²⟩ / |∂⟨O⟩/∂t|`,
//!
//! where `R` is the mean number of input photons sent through the sample, so
//! `Δt` is the precision per illuminating photon. Means and variances come
//! from the exact photon-number engine in [`crate::fock`]. Because
//! `⟨O⟩ = Π t_i^{k_i} ⟨O⟩_in` holds exactly, the derivative is analytic:
//! `κ t^{κ-1} ⟨O⟩_in` with `κ` the total order on sample-passing modes.

use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{
    apply_loss, correlation_mean, correlation_second_moment, expand_source, mean_photon_number,
    CorrelationObservable, FockError, LossNetwork, PhotonNumberDistribution, SourceModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecisionError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("transmittance {0} not in [0, 1]")]
    InvalidTransmittance(f64),
    #[error("closed form {0:?} needs a beta value")]
    MissingBeta(ClosedForm),
    #[error("beta {0} not in [0, 1]")]
    InvalidBeta(f64),
    #[error("grid point {0} not in (0, 1]")]
    InvalidGrid(f64),
}

/// Which modes traverse the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Only the signal (last) mode passes the sample; the others are triggers.
    SinglePass,
    /// Both modes of a pair pass the sample.
    DoublePass,
    /// All `N` modes of an `N`-mode correlated state pass the sample.
    MultiPass(usize),
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Self::SinglePass => "single-pass".into(),
            Self::DoublePass => "double-pass".into(),
            Self::MultiPass(n) => format!("multi-pass-{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Sample transmittance `t₂`.
    pub sample_t: f64,
    pub orders: CorrelationObservable,
    /// Pre-existing per-mode transmittance of the apparatus; all ones if `None`.
    pub apparatus_t: Option<Vec<f64>>,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, sample_t: f64, orders: CorrelationObservable) -> Self {
        Self {
            scheme,
            sample_t,
            orders,
            apparatus_t: None,
        }
    }

    /// First-order coincidences on every mode; the setting used throughout
    /// the two-photon analysis.
    pub fn coincidence(scheme: Scheme, sample_t: f64, modes: usize) -> Self {
        Self::new(scheme, sample_t, CorrelationObservable::coincidence(modes))
    }

    pub fn with_apparatus(mut self, apparatus_t: Vec<f64>) -> Self {
        self.apparatus_t = Some(apparatus_t);
        self
    }

    pub fn with_sample_t(&self, sample_t: f64) -> Self {
        Self {
            sample_t,
            ..self.clone()
        }
    }

    pub fn validate(&self, mode_count: usize) -> Result<(), PrecisionError> {
        if !(self.sample_t.is_finite() && (0.0..=1.0).contains(&self.sample_t)) {
            return Err(PrecisionError::InvalidTransmittance(self.sample_t));
        }
        if self.orders.orders().len() != mode_count {
            return Err(PrecisionError::InvalidScheme(format!(
                "{} orders for a {mode_count}-mode source",
                self.orders.orders().len()
            )));
        }
        match self.scheme {
            Scheme::SinglePass => {}
            Scheme::DoublePass if mode_count != 2 => {
                return Err(PrecisionError::InvalidScheme(format!(
                    "double-pass needs a two-mode source, got {mode_count} modes"
                )))
            }
            Scheme::MultiPass(n) if n < 2 || n != mode_count => {
                return Err(PrecisionError::InvalidScheme(format!(
                    "multi-pass({n}) needs an {n}-mode source with n >= 2, got {mode_count} modes"
                )))
            }
            _ => {}
        }
        if let Some(app) = &self.apparatus_t {
            if app.len() != mode_count {
                return Err(PrecisionError::InvalidScheme(format!(
                    "{} apparatus transmittances for {mode_count} modes",
                    app.len()
                )));
            }
            if let Some(&bad) = app.iter().find(|t| !(t.is_finite() && (0.0..=1.0).contains(*t))) {
                return Err(PrecisionError::InvalidTransmittance(bad));
            }
        }
        Ok(())
    }

    /// Modes whose photons traverse the sample. These are also the modes
    /// counted in the resource `R`.
    pub fn sample_modes(&self, mode_count: usize) -> Vec<usize> {
        match self.scheme {
            Scheme::SinglePass => vec![mode_count - 1],
            Scheme::DoublePass | Scheme::MultiPass(_) => (0..mode_count).collect(),
        }
    }

    pub fn apparatus(&self, mode_count: usize) -> Vec<f64> {
        self.apparatus_t
            .clone()
            .unwrap_or_else(|| vec![1.0; mode_count])
    }

    /// Total per-mode transmittance: apparatus times sample where it applies.
    pub fn mode_transmittances(&self, mode_count: usize) -> Vec<f64> {
        let mut t = self.apparatus(mode_count);
        for i in self.sample_modes(mode_count) {
            t[i] *= self.sample_t;
        }
        t
    }

    /// Total correlation order carried by sample-passing modes; `⟨O⟩ ∝ t^κ`.
    pub fn kappa(&self, mode_count: usize) -> u32 {
        self.sample_modes(mode_count)
            .iter()
            .map(|&i| self.orders.orders()[i])
            .sum()
    }
}

/// Why a precision value could not be formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `t = 0` with `κ > 1`: the derivative vanishes.
    ZeroTransmittance,
    /// `⟨O⟩_in = 0`, nothing to measure.
    ZeroSignal,
    /// No sample-passing mode carries a correlation order.
    NoSampleDependence,
    /// The apparatus blocks a required mode.
    ZeroDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate {
    Defined(f64),
    Undefined(Degeneracy),
}

impl Estimate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Defined(v) => Some(v),
            Self::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Self::Defined(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub mean_o: f64,
    pub second_moment_o: f64,
    /// `⟨O²⟩ - ⟨O⟩²`, clamped at zero.
    pub variance_o: f64,
    pub derivative_do_dt: f64,
    pub resource_r: f64,
    pub delta_t: Estimate,
}

impl PrecisionReport {
    /// Unnormalized uncertainty after `repeats` measurements,
    /// `√⟨ΔO²⟩ / (√M |∂⟨O⟩/∂t|)`.
    pub fn per_measurement(&self, repeats: u64) -> Estimate {
        match self.delta_t {
            Estimate::Undefined(d) => Estimate::Undefined(d),
            Estimate::Defined(_) => Estimate::Defined(
                self.variance_o.sqrt() / ((repeats as f64).sqrt() * self.derivative_do_dt.abs()),
            ),
        }
    }
}

/// Precision of `cfg` for a source, expanded with just enough truncation for
/// the observable.
pub fn precision(source: &SourceModel, cfg: &SchemeConfig) -> Result<PrecisionReport, PrecisionError> {
    let n_max = source.default_truncation(cfg.orders.order_sum());
    let input = expand_source(source, n_max)?;
    precision_on(&input, cfg)
}

/// Precision of `cfg` for an already expanded input state.
pub fn precision_on(
    input: &PhotonNumberDistribution,
    cfg: &SchemeConfig,
) -> Result<PrecisionReport, PrecisionError> {
    let modes = input.mode_count();
    cfg.validate(modes)?;
    let loss = LossNetwork::new(cfg.mode_transmittances(modes))?;
    let output = apply_loss(input, &loss)?;

    let mean_o = correlation_mean(&output, &cfg.orders)?;
    let second_moment_o = correlation_second_moment(&output, &cfg.orders)?;
    let raw_var = second_moment_o - mean_o * mean_o;
    debug_assert!(raw_var >= -1e-12 * second_moment_o.max(1.0), "variance {raw_var}");
    let variance_o = raw_var.max(0.0);

    let mean_in = correlation_mean(input, &cfg.orders)?;
    let kappa = cfg.kappa(modes);
    let apparatus_gain: f64 = cfg
        .apparatus(modes)
        .iter()
        .zip(cfg.orders.orders())
        .map(|(a, &k)| a.powi(k as i32))
        .product();
    let derivative_do_dt = if kappa == 0 {
        0.0
    } else {
        f64::from(kappa) * cfg.sample_t.powi(kappa as i32 - 1) * apparatus_gain * mean_in
    };
    let resource_r = mean_photon_number(input, &cfg.sample_modes(modes))?;

    let delta_t = if kappa == 0 {
        Estimate::Undefined(Degeneracy::NoSampleDependence)
    } else if mean_in == 0.0 {
        Estimate::Undefined(Degeneracy::ZeroSignal)
    } else if cfg.sample_t == 0.0 && kappa > 1 {
        Estimate::Undefined(Degeneracy::ZeroTransmittance)
    } else if derivative_do_dt == 0.0 {
        Estimate::Undefined(Degeneracy::ZeroDerivative)
    } else {
        Estimate::Defined(resource_r.sqrt() * variance_o.sqrt() / derivative_do_dt.abs())
    };

    Ok(PrecisionReport {
        mean_o,
        second_moment_o,
        variance_o,
        derivative_do_dt,
        resource_r,
        delta_t,
    })
}

/// Literal closed-form precisions, kept as a cross-check on [`precision`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    /// `|1,1⟩`, single pass: `√(t(1-t))`.
    IdealSinglePass,
    /// `|1,1⟩`, double pass: `√((1-t²)/2)`.
    IdealDoublePass,
    /// Coherent illumination: `√t`.
    CoherentState,
    /// Weak pair source, single pass: `√(t - t²β²)`.
    WeakSpdcSinglePass,
    /// Weak pair source, double pass: `√((1 - t²β²)/2)`.
    WeakSpdcDoublePass,
}

pub fn precision_closed_form(
    form: ClosedForm,
    t: f64,
    beta: Option<f64>,
) -> Result<f64, PrecisionError> {
    if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
        return Err(PrecisionError::InvalidTransmittance(t));
    }
    let need_beta = || beta.ok_or(PrecisionError::MissingBeta(form));
    Ok(match form {
        ClosedForm::IdealSinglePass => (t * (1.0 - t)).sqrt(),
        ClosedForm::IdealDoublePass => ((1.0 - t * t) / 2.0).sqrt(),
        ClosedForm::CoherentState => t.sqrt(),
        ClosedForm::WeakSpdcSinglePass => {
            let b = need_beta()?;
            (t - t * t * b * b).sqrt()
        }
        ClosedForm::WeakSpdcDoublePass => {
            let b = need_beta()?;
            ((1.0 - t * t * b * b) / 2.0).sqrt()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t_critical: f64,
    /// Set when `β = 0` and the returned value is the limit `1/2`.
    pub beta_zero_limit: bool,
}

/// Transmittance above which double pass beats single pass for a weak pair
/// source: `(1 - √(1-β²))/β²`.
///
/// Evaluated in the algebraically equal form `1/(1 + √(1-β²))`, which has no
/// cancellation at small `β`.
pub fn critical_transmittance(beta: f64) -> Result<CriticalPoint, PrecisionError> {
    if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
        return Err(PrecisionError::InvalidBeta(beta));
    }
    Ok(CriticalPoint {
        t_critical: 1.0 / (1.0 + (1.0 - beta * beta).sqrt()),
        beta_zero_limit: beta == 0.0,
    })
}

fn defined(report: &PrecisionReport) -> Option<f64> {
    report.delta_t.value()
}

/// Single-pass and double-pass precision of a two-mode source at `t`.
pub fn single_and_double_pass(
    input: &PhotonNumberDistribution,
    t: f64,
) -> Result<(Estimate, Estimate), PrecisionError> {
    let sp = precision_on(input, &SchemeConfig::coincidence(Scheme::SinglePass, t, 2))?;
    let dp = precision_on(input, &SchemeConfig::coincidence(Scheme::DoublePass, t, 2))?;
    Ok((sp.delta_t, dp.delta_t))
}

/// Locates the sign change of `Δt_SP - Δt_DP` on `[lo, hi]` by bisection.
///
/// Returns `None` when both ends have the same sign.
pub fn crossover_by_bisection(
    input: &PhotonNumberDistribution,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Option<f64>, PrecisionError> {
    let gap = |t: f64| -> Result<f64, PrecisionError> {
        let (sp, dp) = single_and_double_pass(input, t)?;
        match (sp.value(), dp.value()) {
            (Some(a), Some(b)) => Ok(a - b),
            _ => Ok(f64::NAN),
        }
    };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (gap(a)?, gap(b)?);
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Ok(None);
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = gap(mid)?;
        if fm == 0.0 {
            return Ok(Some(mid));
        }
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// `Δt_SP / Δt_DP` for a weak pair source of amplitude `beta` over `t_grid`.
pub fn enhancement_curve(beta: f64, t_grid: &[f64]) -> Result<Vec<f64>, PrecisionError> {
    let input = expand_source(&SourceModel::WeakSpdc { beta }, 2)?;
    enhancement_curve_on(&input, t_grid)
}

/// `Δt_SP / Δt_DP` for any two-mode input state.
pub fn enhancement_curve_on(
    input: &PhotonNumberDistribution,
    t_grid: &[f64],
) -> Result<Vec<f64>, PrecisionError> {
    if let Some(&bad) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(PrecisionError::InvalidGrid(bad));
    }
    t_grid
        .par_iter()
        .map(|&t| {
            let (sp, dp) = single_and_double_pass(input, t)?;
            Ok(match (sp.value(), dp.value()) {
                (Some(a), Some(b)) => a / b,
                _ => f64::NAN,
            })
        })
        .collect()
}

/// All `N` modes of a correlated source pass the sample at transmittance `t`.
pub fn multipass_precision(
    source: &SourceModel,
    t: f64,
    orders: CorrelationObservable,
) -> Result<PrecisionReport, PrecisionError> {
    let SourceModel::MultiModeCorrelated { modes, .. } = *source else {
        return Err(PrecisionError::InvalidScheme(
            "multi-pass analysis needs a multi-mode correlated source".into(),
        ));
    };
    precision(source, &SchemeConfig::new(Scheme::MultiPass(modes), t, orders))
}

/// `Δt_SP / Δt_MP` for first-order coincidences on an `N`-mode source.
pub fn multipass_enhancement(source: &SourceModel, t: f64) -> Result<Estimate, PrecisionError> {
    let modes = source.mode_count();
    let mp = multipass_precision(source, t, CorrelationObservable::coincidence(modes))?;
    let sp = precision(source, &SchemeConfig::coincidence(Scheme::SinglePass, t, modes))?;
    Ok(match (defined(&sp), mp.delta_t) {
        (Some(a), Estimate::Defined(b)) if b > 0.0 => Estimate::Defined(a / b),
        (_, Estimate::Undefined(d)) => Estimate::Undefined(d),
        (None, _) => sp.delta_t,
        _ => Estimate::Undefined(Degeneracy::ZeroDerivative),
    })
}

/// One row of a single-pass / double-pass / coherent comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub dt_sp: Estimate,
    pub dt_dp: Estimate,
    pub dt_cs: Estimate,
    pub enhancement: Option<f64>,
    /// First grid row at or above the critical transmittance.
    pub critical_marker: bool,
}

/// Evaluates all three precisions over `t_grid` for a two-mode pair source.
///
/// The coherent column uses a single mode of Poisson(`coherent_mean`) light
/// measured by intensity. The critical marker uses the weak-source formula
/// with `beta` (`β = 1` reproduces the ideal-pair curves).
pub fn precision_sweep(
    source: &SourceModel,
    beta_for_critical: f64,
    coherent_mean: f64,
    t_grid: &[f64],
) -> Result<Vec<SweepRow>, PrecisionError> {
    if let Some(&bad) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(PrecisionError::InvalidGrid(bad));
    }
    if source.mode_count() != 2 {
        return Err(PrecisionError::InvalidScheme(
            "precision sweep compares two-mode pair sources".into(),
        ));
    }
    let pair = expand_source(source, source.default_truncation(2))?;
    let coherent = SourceModel::Coherent {
        mean_photons: coherent_mean,
        modes: 1,
    };
    let coherent_in = expand_source(&coherent, coherent.default_truncation(1))?;
    let t_c = critical_transmittance(beta_for_critical)?.t_critical;

    let mut rows: Vec<SweepRow> = t_grid
        .par_iter()
        .map(|&t| {
            let (sp, dp) = single_and_double_pass(&pair, t)?;
            let cs = precision_on(&coherent_in, &SchemeConfig::coincidence(Scheme::SinglePass, t, 1))?;
            let enhancement = match (sp.value(), dp.value()) {
                (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                _ => None,
            };
            Ok(SweepRow {
                t,
                dt_sp: sp,
                dt_dp: dp,
                dt_cs: cs.delta_t,
                enhancement,
                critical_marker: false,
            })
        })
        .collect::<Result<_, PrecisionError>>()?;
    if let Some(row) = rows
        .iter_mut()
        .filter(|r| r.t >= t_c)
        .min_by(|a, b| a.t.total_cmp(&b.t))
    {
        row.critical_marker = true;
    }
    Ok(rows)
}
