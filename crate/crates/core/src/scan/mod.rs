//! Raster-scan simulation of a transmission microscope.
//!
//! Every pixel is one dwell window of the counting experiment at that
//! pixel's transmittance. Region statistics are taken over the pixels of the
//! bottom `analysis_rows` rows, and each region is compared against the
//! highest-transmittance (reference) region, whose output is treated as the
//! input state.

mod map;

pub use map::{RegionTransmittance, SampleMap, DEFAULT_PIXEL_PITCH_NM};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fock::SourceModel;
use crate::montecarlo::{
    analytic_counts, resource_matched_pair, snr_from_counts, BootstrapConfig, DwellSampler,
    ExperimentConfig, McError, SnrEstimate, StreamFamily, RESOURCE_MATCH_TOLERANCE,
};
use crate::precision::{Scheme, SchemeConfig};
use crate::stats::{sample_std_dev, CountStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("map line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("label {0:?} has no legend entry")]
    UnknownRegion(char),
    #[error("region {0:?} has fewer than 2 pixels in the analysis rows")]
    EmptyRegion(char),
    #[error("reference region {0:?} has zero mean counts")]
    ZeroReference(char),
    #[error("scan results are not comparable: {0}")]
    MismatchedScans(String),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
}

pub const DEFAULT_ANALYSIS_ROWS: usize = 25;
pub const DEFAULT_REFERENCE_COUNTS: f64 = 5000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// Event rate, scheme, detectors and seed. `dwells` is replaced by the
    /// pixel count and `scheme.sample_t` by each pixel's transmittance.
    pub experiment: ExperimentConfig,
    pub analysis_rows: usize,
    pub bootstrap_resamples: usize,
}

impl ScanConfig {
    pub fn new(experiment: ExperimentConfig) -> Self {
        Self {
            experiment,
            analysis_rows: DEFAULT_ANALYSIS_ROWS,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmittanceEstimate {
    pub t_hat: f64,
    /// Propagated from the standard errors of the two region means.
    pub t_err: f64,
    /// Propagated from the per-pixel spread; the single-pixel uncertainty.
    pub t_pixel_sd: f64,
    /// `t_hat` exceeded 1 through noise and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub label: char,
    pub t_legend: f64,
    pub pixels: usize,
    pub mean: f64,
    pub variance: f64,
    pub estimate: TransmittanceEstimate,
    /// SNR against the reference region; `None` for the reference itself.
    pub snr_vs_ref: Option<SnrEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<char>,
    /// Row-major coincidence counts.
    pub counts: Vec<u64>,
    pub experiment: ExperimentConfig,
    pub reference: char,
    pub analysis_rows: usize,
    pub region_stats: BTreeMap<char, RegionStats>,
    samples: BTreeMap<char, Vec<u64>>,
    exponent: u32,
}

impl ScanResult {
    pub fn scheme(&self) -> &SchemeConfig {
        &self.experiment.scheme
    }

    /// Window pixel counts of one region.
    pub fn region_samples(&self, label: char) -> Option<&[u64]> {
        self.samples.get(&label).map(Vec::as_slice)
    }

    /// Power of `t` that region means follow: number of sample-passing
    /// modes that must click.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }
}

fn click_exponent(cfg: &ExperimentConfig) -> u32 {
    let modes = cfg.mode_count();
    cfg.scheme
        .sample_modes(modes)
        .iter()
        .filter(|&&i| cfg.scheme.orders.orders()[i] > 0)
        .count() as u32
}

fn derive_seed(seed: u64, tag: &str) -> u64 {
    use rand::RngCore;
    StreamFamily::new(seed, tag).stream(0).next_u64()
}

/// Simulates every pixel of `map` and summarizes each region.
pub fn scan(map: &SampleMap, cfg: &ScanConfig) -> Result<ScanResult, ScanError> {
    let base = ExperimentConfig {
        dwells: map.pixel_count().max(2),
        ..cfg.experiment.clone()
    };
    base.validate()?;
    let exponent = click_exponent(&base);
    let regions = map.regions();
    let samplers: BTreeMap<char, DwellSampler> = regions
        .iter()
        .map(|&r| {
            let t = map.transmittance(r).ok_or(ScanError::UnknownRegion(r))?;
            Ok((r, DwellSampler::new(&base.with_sample_t(t))?))
        })
        .collect::<Result<_, ScanError>>()?;
    let scheme_tag = base.scheme.scheme.name();
    let family = StreamFamily::new(base.rng_seed, &format!("scan/{scheme_tag}"));
    let labels = map.labels();
    let record = crate::montecarlo::simulate(map.pixel_count(), base.mode_count(), &family, |i| {
        &samplers[&labels[i]]
    });
    let counts = record.coincidences().to_vec();

    let first_row = map.height().saturating_sub(cfg.analysis_rows);
    let mut samples: BTreeMap<char, Vec<u64>> = BTreeMap::new();
    for y in first_row..map.height() {
        for x in 0..map.width() {
            let i = y * map.width() + x;
            samples.entry(labels[i]).or_default().push(counts[i]);
        }
    }
    for &r in &regions {
        if samples.get(&r).map_or(0, Vec::len) < 2 {
            return Err(ScanError::EmptyRegion(r));
        }
    }
    let reference = map.reference_label();

    let mut region_stats = BTreeMap::new();
    for &r in &regions {
        let stats = CountStats::from_counts(&samples[&r]);
        let estimate = transmittance_from_samples(&samples[&r], &samples[&reference], exponent, r == reference)
            .ok_or(ScanError::ZeroReference(reference))?;
        let snr_vs_ref = if r == reference {
            None
        } else {
            let boot = BootstrapConfig {
                resamples: cfg.bootstrap_resamples,
                seed: derive_seed(base.rng_seed, &format!("snr/{scheme_tag}/{r}")),
            };
            Some(snr_from_counts(&samples[&reference], &samples[&r], &boot)?)
        };
        region_stats.insert(
            r,
            RegionStats {
                label: r,
                t_legend: map.transmittance(r).expect("region has legend"),
                pixels: stats.n,
                mean: stats.mean,
                variance: stats.variance,
                estimate,
                snr_vs_ref,
            },
        );
    }

    Ok(ScanResult {
        width: map.width(),
        height: map.height(),
        labels: labels.to_vec(),
        counts,
        experiment: base,
        reference,
        analysis_rows: cfg.analysis_rows,
        region_stats,
        samples,
        exponent,
    })
}

fn transmittance_from_samples(
    region: &[u64],
    reference: &[u64],
    exponent: u32,
    same: bool,
) -> Option<TransmittanceEstimate> {
    let r = CountStats::from_counts(region);
    let a = CountStats::from_counts(reference);
    if a.mean == 0.0 || exponent == 0 {
        return None;
    }
    if same {
        return Some(TransmittanceEstimate {
            t_hat: 1.0,
            t_err: 0.0,
            t_pixel_sd: 0.0,
            clamped: false,
        });
    }
    let ratio = r.mean / a.mean;
    let k = f64::from(exponent);
    let raw = ratio.powf(1.0 / k);
    // dt/dratio = t^{1-k} / k
    let slope = raw.powf(1.0 - k) / k;
    let propagate = |u_r: f64, u_a: f64| slope * ((u_r / a.mean).powi(2) + (ratio * u_a / a.mean).powi(2)).sqrt();
    Some(TransmittanceEstimate {
        t_hat: raw.min(1.0),
        t_err: propagate(r.std_error(), a.std_error()),
        t_pixel_sd: propagate(r.std_dev(), a.std_dev()),
        clamped: raw > 1.0,
    })
}

/// `t̂ = (mean_region / mean_reference)^{1/κ}` with `κ = 1` for single pass
/// and `κ = 2` for double pass.
pub fn estimate_transmittance(
    result: &ScanResult,
    region: char,
    reference: char,
) -> Result<TransmittanceEstimate, ScanError> {
    let get = |l: char| result.region_samples(l).ok_or(ScanError::EmptyRegion(l));
    transmittance_from_samples(get(region)?, get(reference)?, result.exponent, region == reference)
        .ok_or(ScanError::ZeroReference(reference))
}

/// Expected image SNR between the reference and a region for Poisson pair
/// generation, from the exact per-pixel count law.
pub fn analytic_snr(cfg: &ExperimentConfig, t_reference: f64, t: f64) -> Result<f64, McError> {
    let a = analytic_counts(&cfg.with_sample_t(t_reference))?;
    let b = analytic_counts(&cfg.with_sample_t(t))?;
    let var = a.coincidence_variance + b.coincidence_variance;
    Ok((a.coincidence_mean - b.coincidence_mean) / var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementRow {
    pub region: char,
    pub t_legend: f64,
    pub snr_sp: f64,
    pub snr_sp_err: f64,
    pub snr_dp: f64,
    pub snr_dp_err: f64,
    pub enhancement: f64,
    /// Standard deviation of the replicate-wise ratio of bootstrap SNRs.
    pub enhancement_err: f64,
    pub analytic_enhancement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementReport {
    pub reference: char,
    pub rows: Vec<EnhancementRow>,
}

/// Analytic `SNR_mp / SNR_sp` against a reference of transmittance
/// `t_reference`, for overlaying on measured enhancements.
pub fn analytic_enhancement_curve(
    single: &ExperimentConfig,
    multi: &ExperimentConfig,
    t_reference: f64,
    t_grid: &[f64],
) -> Result<Vec<(f64, f64)>, McError> {
    t_grid
        .iter()
        .map(|&t| Ok((t, analytic_snr(multi, t_reference, t)? / analytic_snr(single, t_reference, t)?)))
        .collect()
}

/// Per-region `SNR_dp / SNR_sp` for two scans of the same map.
pub fn enhancement_report(sp: &ScanResult, dp: &ScanResult) -> Result<EnhancementReport, ScanError> {
    if sp.width != dp.width || sp.height != dp.height || sp.labels != dp.labels {
        return Err(ScanError::MismatchedScans("maps differ".into()));
    }
    if sp.reference != dp.reference || sp.analysis_rows != dp.analysis_rows {
        return Err(ScanError::MismatchedScans("reference region or analysis rows differ".into()));
    }
    let (a, b) = (sp.experiment.launched_photons(), dp.experiment.launched_photons());
    if (a - b).abs() / a.max(b) >= RESOURCE_MATCH_TOLERANCE {
        return Err(ScanError::MismatchedScans(format!(
            "launched photons differ: {a} vs {b}"
        )));
    }
    let t_ref = sp.region_stats[&sp.reference].t_legend;
    let mut rows = Vec::new();
    for (label, s) in &sp.region_stats {
        let (Some(s_snr), Some(d_snr)) = (&s.snr_vs_ref, &dp.region_stats[label].snr_vs_ref) else {
            continue;
        };
        let ratios: Vec<f64> = s_snr
            .replicates
            .iter()
            .zip(&d_snr.replicates)
            .map(|(a, b)| b / a)
            .filter(|v| v.is_finite())
            .collect();
        let analytic = analytic_snr(&dp.experiment, t_ref, s.t_legend)? / analytic_snr(&sp.experiment, t_ref, s.t_legend)?;
        rows.push(EnhancementRow {
            region: *label,
            t_legend: s.t_legend,
            snr_sp: s_snr.snr,
            snr_sp_err: s_snr.std_error,
            snr_dp: d_snr.snr,
            snr_dp_err: d_snr.std_error,
            enhancement: d_snr.snr / s_snr.snr,
            enhancement_err: sample_std_dev(&ratios),
            analytic_enhancement: analytic,
        });
    }
    Ok(EnhancementReport {
        reference: sp.reference,
        rows,
    })
}

/// Settings for a single-pass scan and its resource-matched multi-pass twin.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedScanConfig {
    pub source: SourceModel,
    pub rng_seed: u64,
    /// Mean single-pass coincidences per pixel in the reference region.
    pub reference_counts: f64,
    pub analysis_rows: usize,
    pub bootstrap_resamples: usize,
    pub detector_efficiency: Option<Vec<f64>>,
}

impl MatchedScanConfig {
    pub fn new(source: SourceModel, rng_seed: u64) -> Self {
        Self {
            source,
            rng_seed,
            reference_counts: DEFAULT_REFERENCE_COUNTS,
            analysis_rows: DEFAULT_ANALYSIS_ROWS,
            bootstrap_resamples: 1000,
            detector_efficiency: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedScans {
    pub single_pass: ScanResult,
    pub multi_pass: ScanResult,
    pub report: EnhancementReport,
}

/// Both schemes over the same map with matched launched photons.
///
/// The single-pass rate is set so the reference region averages
/// `reference_counts` coincidences per pixel; the multi-pass rate follows
/// from matching photons launched onto the sample.
pub fn run_matched_scans(map: &SampleMap, cfg: &MatchedScanConfig) -> Result<MatchedScans, ScanError> {
    let modes = cfg.source.mode_count();
    let multi_scheme = if modes == 2 { Scheme::DoublePass } else { Scheme::MultiPass(modes) };
    let t_ref = map
        .transmittance(map.reference_label())
        .expect("reference label is in the legend");
    let dwells = map.pixel_count().max(2);
    let make = |scheme: Scheme| -> Result<ExperimentConfig, McError> {
        let e = ExperimentConfig::new(
            cfg.source.clone(),
            SchemeConfig::coincidence(scheme, t_ref, modes),
            1.0,
            dwells,
            cfg.rng_seed,
        )?;
        match &cfg.detector_efficiency {
            Some(eff) => e.with_detector_efficiency(eff.clone()),
            None => Ok(e),
        }
    };
    let sp_unit = make(Scheme::SinglePass)?;
    let per_event = analytic_counts(&sp_unit)?.coincidence_mean;
    if per_event <= 0.0 {
        return Err(ScanError::ZeroReference(map.reference_label()));
    }
    let sp_cfg = sp_unit.with_pairs_mean(cfg.reference_counts / per_event);
    let matched = resource_matched_pair(&sp_cfg, &make(multi_scheme)?)?;

    let run = |experiment: ExperimentConfig| {
        scan(
            map,
            &ScanConfig {
                experiment,
                analysis_rows: cfg.analysis_rows,
                bootstrap_resamples: cfg.bootstrap_resamples,
            },
        )
    };
    let single_pass = run(matched.single_pass)?;
    let multi_pass = run(matched.multi_pass)?;
    let report = enhancement_report(&single_pass, &multi_pass)?;
    Ok(MatchedScans {
        single_pass,
        multi_pass,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_region(width_each: usize, rows: usize) -> SampleMap {
        SampleMap::bands(rows, &[('A', width_each, 1.0), ('B', width_each, 0.87), ('C', width_each, 0.66)])
            .unwrap()
    }

    fn quick(map: &SampleMap, seed: u64) -> MatchedScans {
        let mut cfg = MatchedScanConfig::new(SourceModel::IdealPair, seed);
        cfg.bootstrap_resamples = 200;
        run_matched_scans(map, &cfg).unwrap()
    }

    #[test]
    fn uniform_map_has_no_contrast() {
        let map = SampleMap::bands(25, &[('A', 20, 1.0), ('B', 20, 1.0)]).unwrap();
        let res = quick(&map, 3);
        let sp = &res.single_pass;
        for s in sp.region_stats.values() {
            assert!((s.mean - 5000.0).abs() < 4.0 * (5000.0 / s.pixels as f64).sqrt() + 1e-9);
        }
        let snr = sp.region_stats[&'B'].snr_vs_ref.as_ref().unwrap();
        assert!(snr.snr.abs() < 4.0 * snr.std_error, "{snr:?}");
    }

    #[test]
    fn region_means_follow_scheme_law() {
        let map = three_region(20, 25);
        let res = quick(&map, 4);
        for (scheme, budget, power) in [(&res.single_pass, 5000.0, 1), (&res.multi_pass, 2500.0, 2)] {
            for s in scheme.region_stats.values() {
                let mu = budget * s.t_legend.powi(power);
                let se = (mu / s.pixels as f64).sqrt();
                assert!((s.mean - mu).abs() < 4.0 * se, "{} {} vs {mu}", s.label, s.mean);
            }
        }
    }

    #[test]
    fn reference_estimates_exactly_one() {
        let map = three_region(5, 25);
        let res = quick(&map, 5);
        let e = estimate_transmittance(&res.multi_pass, 'A', 'A').unwrap();
        assert_eq!(e.t_hat, 1.0);
        assert_eq!(e.t_err, 0.0);
    }

    #[test]
    fn double_pass_square_root_estimate() {
        // region/reference = 0.4356 → t̂ = 0.66
        let est = transmittance_from_samples(&[4356, 4356], &[10000, 10000], 2, false).unwrap();
        assert!((est.t_hat - 0.66).abs() < 1e-12);
        let est = transmittance_from_samples(&[11000, 11000], &[10000, 10000], 1, false).unwrap();
        assert!(est.clamped && est.t_hat == 1.0);
        assert!(transmittance_from_samples(&[1, 2], &[0, 0], 1, false).is_none());
    }

    #[test]
    fn single_pass_pixel_uncertainty_scale() {
        // One pixel at t=0.87 against the reference at 5000 counts:
        // √((t² + t)/5000) ≈ 0.018.
        let map = three_region(20, 25);
        let res = quick(&map, 6);
        let e = estimate_transmittance(&res.single_pass, 'B', 'A').unwrap();
        let oracle = ((0.87f64 * 0.87 + 0.87) / 5000.0).sqrt();
        assert!((e.t_pixel_sd - oracle).abs() < 0.2 * oracle, "{e:?} vs {oracle}");
        assert!(e.t_pixel_sd > 0.01 && e.t_pixel_sd < 0.03);
    }

    #[test]
    fn identical_scans_give_unit_enhancement() {
        let map = three_region(10, 25);
        let res = quick(&map, 7);
        let rep = enhancement_report(&res.single_pass, &res.single_pass).unwrap();
        for row in rep.rows {
            assert_eq!(row.enhancement, 1.0);
        }
    }

    #[test]
    fn mismatched_maps_are_rejected() {
        let a = quick(&three_region(10, 25), 8);
        let b = quick(&three_region(11, 25), 8);
        assert!(matches!(
            enhancement_report(&a.single_pass, &b.multi_pass),
            Err(ScanError::MismatchedScans(_))
        ));
        let unmatched = ScanResult {
            experiment: a.multi_pass.experiment.with_pairs_mean(5000.0),
            ..a.multi_pass.clone()
        };
        assert!(enhancement_report(&a.single_pass, &unmatched).is_err());
    }

    #[test]
    fn empty_region_in_window_is_an_error() {
        // Region C only occupies the top row, outside the bottom 25 rows.
        let mut labels = vec!['C'; 30];
        labels.extend(std::iter::repeat_n('A', 30 * 25));
        let legend = [('A', RegionTransmittance::Direct(1.0)), ('C', RegionTransmittance::Direct(0.5))]
            .into_iter()
            .collect();
        let map = SampleMap::new(30, 26, labels, legend).unwrap();
        let cfg = MatchedScanConfig::new(SourceModel::IdealPair, 1);
        assert_eq!(run_matched_scans(&map, &cfg).unwrap_err(), ScanError::EmptyRegion('C'));
    }

    #[test]
    fn analytic_ratio_matches_closed_form() {
        // With Poisson pairs and matched photons, SNR_dp/SNR_sp =
        // (1+t)^{3/2} / √(2(1+t²)).
        let map = three_region(2, 2);
        let cfg = MatchedScanConfig::new(SourceModel::IdealPair, 1);
        let mut c = cfg.clone();
        c.analysis_rows = 2;
        c.bootstrap_resamples = 10;
        let res = run_matched_scans(&map, &c).unwrap();
        for row in &res.report.rows {
            let t = row.t_legend;
            let oracle = (1.0 + t).powf(1.5) / (2.0 * (1.0 + t * t)).sqrt();
            assert!((row.analytic_enhancement - oracle).abs() < 1e-12);
        }
    }
}
