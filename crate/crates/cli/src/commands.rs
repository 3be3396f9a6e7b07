use std::path::Path;

use pairscope::fock::{expand_source, FockError, SourceModel, MAX_NORMAL_ORDER};
use pairscope::io;
use pairscope::montecarlo::{
    analytic_counts, mc_vs_analytic_report, run_counting, ExperimentConfig, McError,
};
use pairscope::precision::{
    critical_transmittance, crossover_by_bisection, precision_sweep as sweep, PrecisionError, Scheme,
    SchemeConfig,
};
use pairscope::scan::{run_matched_scans, MatchedScanConfig, SampleMap, ScanError};

use crate::config::RunConfig;
use crate::CliError;

/// Files produced by a command, in write order.
#[derive(Debug, Default)]
pub struct Output {
    pub artifacts: Vec<(String, Vec<u8>)>,
    /// Input files whose checksums go into the manifest.
    pub inputs: Vec<(String, Vec<u8>)>,
    /// Set when outputs were written but some quantity was undefined.
    pub degenerate: Option<String>,
}

impl Output {
    fn add(&mut self, name: &str, text: String) {
        self.artifacts.push((name.to_string(), text.into_bytes()));
    }
}

fn from_fock(e: FockError) -> CliError {
    CliError::Config(e.to_string())
}

fn from_precision(e: PrecisionError) -> CliError {
    match e {
        PrecisionError::Fock(f) => from_fock(f),
        other => CliError::Config(other.to_string()),
    }
}

fn from_mc(e: McError) -> CliError {
    match e {
        McError::UndefinedSnr => CliError::Degenerate(e.to_string()),
        McError::Precision(p) => from_precision(p),
        McError::Fock(f) => from_fock(f),
        other => CliError::Config(other.to_string()),
    }
}

fn from_scan(e: ScanError) -> CliError {
    match e {
        ScanError::MonteCarlo(m) => from_mc(m),
        ScanError::ZeroReference(_) => CliError::Degenerate(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn precision_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let source = cfg.source.model(cfg.n_max)?;
    let beta = cfg
        .source
        .beta()
        .ok_or_else(|| CliError::Config("precision-sweep needs a two-mode pair source".into()))?;
    let grid = cfg.precision_sweep.grid()?;
    let rows = sweep(&source, beta, cfg.precision_sweep.coherent_mean, &grid).map_err(from_precision)?;
    let mut out = Output::default();
    out.add("precision_sweep.csv", io::sweep_csv(&rows));
    let undefined: Vec<String> = rows
        .iter()
        .filter(|r| !(r.dt_sp.is_defined() && r.dt_dp.is_defined() && r.dt_cs.is_defined()))
        .map(|r| r.t.to_string())
        .collect();
    if !undefined.is_empty() {
        out.degenerate = Some(format!("precision undefined at t = {}", undefined.join(", ")));
    }
    Ok(out)
}

pub fn critical(cfg: &RunConfig) -> Result<Output, CliError> {
    let c = &cfg.critical;
    let beta = match c.beta {
        Some(b) => b,
        None => match &cfg.source {
            crate::config::SourceConfig::WeakSpdc { beta } => *beta,
            _ => 0.01,
        },
    };
    let point = critical_transmittance(beta).map_err(from_precision)?;
    if !(c.tolerance > 0.0 && c.t_lo > 0.0 && c.t_lo < c.t_hi && c.t_hi <= 1.0) {
        return Err(CliError::Config(format!(
            "bisection range [{}, {}] with tolerance {} is invalid",
            c.t_lo, c.t_hi, c.tolerance
        )));
    }
    let mut out = Output::default();
    let found = if beta > 0.0 {
        let input = expand_source(&SourceModel::WeakSpdc { beta }, 2).map_err(from_fock)?;
        crossover_by_bisection(&input, c.t_lo, c.t_hi, c.tolerance).map_err(from_precision)?
    } else {
        None
    };
    if found.is_none() {
        out.degenerate = Some(format!("no crossover in [{}, {}]", c.t_lo, c.t_hi));
    }
    out.add("critical.csv", io::critical_csv(beta, &point, found));
    Ok(out)
}

pub fn coeffs(cfg: &RunConfig) -> Result<Output, CliError> {
    let k = cfg.coeffs.k_max;
    if !(1..=6).contains(&k) {
        return Err(CliError::Config(format!("coeffs.k_max = {k} not in 1..=6")));
    }
    debug_assert!(k <= MAX_NORMAL_ORDER);
    let mut out = Output::default();
    out.add("coeffs.csv", io::coefficients_csv(k).map_err(from_fock)?);
    Ok(out)
}

fn experiment(cfg: &RunConfig) -> Result<ExperimentConfig, CliError> {
    let m = &cfg.montecarlo;
    let source = cfg.source.model(cfg.n_max)?;
    let modes = source.mode_count();
    let scheme = SchemeConfig::coincidence(m.scheme.resolve(modes), m.t, modes);
    let mut e = ExperimentConfig::new(source, scheme, m.pairs_mean, m.dwells, cfg.rng_seed).map_err(from_mc)?;
    if let Some(eff) = &m.detector_efficiency {
        e = e.with_detector_efficiency(eff.clone()).map_err(from_mc)?;
    }
    if m.background != 0.0 {
        e = e.with_background(m.background).map_err(from_mc)?;
    }
    Ok(e)
}

pub fn montecarlo(cfg: &RunConfig) -> Result<Output, CliError> {
    let m = &cfg.montecarlo;
    let e = experiment(cfg)?;
    let mut out = Output::default();
    let table = mc_vs_analytic_report(&e, m.replicates).map_err(from_mc)?;
    out.add("convergence.csv", io::convergence_csv(&table));
    out.add("counts.csv", io::count_record_csv(&run_counting(&e).map_err(from_mc)?));

    if m.matched {
        // Reference ensemble at t = 1 and sample ensemble at t, one row of
        // `dwells` pixels each.
        let map = SampleMap::bands(1, &[('R', m.dwells, 1.0), ('S', m.dwells, m.t)]).map_err(from_scan)?;
        let sp_unit = ExperimentConfig::new(
            e.source.clone(),
            SchemeConfig::coincidence(Scheme::SinglePass, 1.0, e.mode_count()),
            1.0,
            2,
            cfg.rng_seed,
        )
        .map_err(from_mc)?;
        let per_event = analytic_counts(&sp_unit).map_err(from_mc)?.coincidence_mean;
        let mut mc = MatchedScanConfig::new(e.source.clone(), cfg.rng_seed);
        mc.reference_counts = m.pairs_mean * per_event;
        mc.analysis_rows = 1;
        mc.bootstrap_resamples = m.bootstrap_resamples;
        mc.detector_efficiency = m.detector_efficiency.clone();
        let scans = run_matched_scans(&map, &mc).map_err(from_scan)?;
        out.add("matched_enhancement.csv", io::enhancement_csv(&scans.report));
    }
    Ok(out)
}

pub fn scan(cfg: &RunConfig, base: &Path) -> Result<Output, CliError> {
    let s = &cfg.scan;
    let rel = s
        .map
        .as_ref()
        .ok_or_else(|| CliError::Config("scan.map is required".into()))?;
    let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read map {}: {e}", path.display())))?;
    let map = SampleMap::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let mut mc = MatchedScanConfig::new(cfg.source.model(cfg.n_max)?, cfg.rng_seed);
    mc.reference_counts = s.reference_counts;
    mc.analysis_rows = s.analysis_rows;
    mc.bootstrap_resamples = s.bootstrap_resamples;
    mc.detector_efficiency = s.detector_efficiency.clone();
    let scans = run_matched_scans(&map, &mc).map_err(from_scan)?;

    let tag = if map_modes(cfg)? == 2 { "dp" } else { "mp" };
    let mut out = Output::default();
    out.inputs.push((path.display().to_string(), text.into_bytes()));
    out.add("scan_sp.pgm", io::scan_pgm(&scans.single_pass));
    out.add(&format!("scan_{tag}.pgm"), io::scan_pgm(&scans.multi_pass));
    out.add("pixels_sp.csv", io::scan_pixels_csv(&scans.single_pass));
    out.add(&format!("pixels_{tag}.csv"), io::scan_pixels_csv(&scans.multi_pass));
    out.add("regions_sp.csv", io::scan_regions_csv(&scans.single_pass));
    out.add(&format!("regions_{tag}.csv"), io::scan_regions_csv(&scans.multi_pass));
    out.add("enhancement.csv", io::enhancement_csv(&scans.report));
    Ok(out)
}

fn map_modes(cfg: &RunConfig) -> Result<usize, CliError> {
    Ok(cfg.source.model(cfg.n_max)?.mode_count())
}
