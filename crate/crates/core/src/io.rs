//! CSV and PGM serialization. Every CSV has a header row; floats use
//! `format_f64` (17 significant digits, empty for undefined values).

use std::fmt::Write as _;

use crate::fock::normal_order_coefficients;
use crate::montecarlo::{ConvergenceTable, CountRecord};
use crate::precision::{CriticalPoint, Estimate, SweepRow};
use crate::scan::{EnhancementReport, ScanResult};
use crate::stats::format_f64;

fn est(e: &Estimate) -> String {
    e.value().map(format_f64).unwrap_or_default()
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

macro_rules! row {
    ($out:expr, $($field:expr),+ $(,)?) => {{
        let fields: Vec<String> = vec![$($field.to_string()),+];
        $out.push_str(&fields.join(","));
        $out.push('\n');
    }};
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("t,dt_sp,dt_dp,dt_cs,enhancement,t_critical\n");
    for r in rows {
        row!(
            out,
            format_f64(r.t),
            est(&r.dt_sp),
            est(&r.dt_dp),
            est(&r.dt_cs),
            opt(r.enhancement),
            u8::from(r.critical_marker),
        );
    }
    out
}

/// `beta,t_critical,t_bisection,beta_zero_limit`; `t_bisection` is empty
/// when no crossover was found.
pub fn critical_csv(beta: f64, point: &CriticalPoint, bisection: Option<f64>) -> String {
    let mut out = String::from("beta,t_critical,t_bisection,beta_zero_limit\n");
    row!(
        out,
        format_f64(beta),
        format_f64(point.t_critical),
        opt(bisection),
        u8::from(point.beta_zero_limit),
    );
    out
}

/// `k,m,c` for every order `1..=k_max`.
pub fn coefficients_csv(k_max: u32) -> Result<String, crate::fock::FockError> {
    let mut out = String::from("k,m,c\n");
    for k in 1..=k_max {
        for (m, c) in normal_order_coefficients(k)?.iter().enumerate() {
            row!(out, k, m, c);
        }
    }
    Ok(out)
}

pub fn count_record_csv(record: &CountRecord) -> String {
    let mut out = String::from("dwell_index,coincidences");
    for i in 1..=record.mode_count() {
        write!(out, ",singles_{i}").expect("writing to a String");
    }
    out.push('\n');
    for d in 0..record.dwells() {
        write!(out, "{d},{}", record.coincidences()[d]).expect("writing to a String");
        for m in 0..record.mode_count() {
            write!(out, ",{}", record.singles(m)[d]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("replicate,statistic,empirical,analytic,std_error,z\n");
    for r in &table.rows {
        row!(
            out,
            r.replicate,
            r.statistic,
            format_f64(r.empirical),
            format_f64(r.analytic),
            format_f64(r.std_error),
            format_f64(r.z),
        );
    }
    out
}

/// ASCII graymap, maxval 65535, counts clamped to the maxval.
pub fn scan_pgm(result: &ScanResult) -> String {
    let mut out = format!("P2\n{} {}\n65535\n", result.width, result.height);
    for row in result.counts.chunks(result.width) {
        let cells: Vec<String> = row.iter().map(|&c| c.min(65535).to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn scan_pixels_csv(result: &ScanResult) -> String {
    let mut out = String::from("pixel_x,pixel_y,label,counts\n");
    for (i, &c) in result.counts.iter().enumerate() {
        row!(out, i % result.width, i / result.width, result.labels[i], c);
    }
    out
}

pub fn scan_regions_csv(result: &ScanResult) -> String {
    let mut out = String::from("region,mean,variance,t_hat,t_err,snr_vs_ref,snr_err\n");
    for s in result.region_stats.values() {
        row!(
            out,
            s.label,
            format_f64(s.mean),
            format_f64(s.variance),
            format_f64(s.estimate.t_hat),
            format_f64(s.estimate.t_err),
            opt(s.snr_vs_ref.as_ref().map(|e| e.snr)),
            opt(s.snr_vs_ref.as_ref().map(|e| e.std_error)),
        );
    }
    out
}

pub fn enhancement_csv(report: &EnhancementReport) -> String {
    let mut out = String::from(
        "region,t_legend,snr_sp,snr_sp_err,snr_dp,snr_dp_err,enhancement,enhancement_err,analytic_enhancement\n",
    );
    for r in &report.rows {
        row!(
            out,
            r.region,
            format_f64(r.t_legend),
            format_f64(r.snr_sp),
            format_f64(r.snr_sp_err),
            format_f64(r.snr_dp),
            format_f64(r.snr_dp_err),
            format_f64(r.enhancement),
            format_f64(r.enhancement_err),
            format_f64(r.analytic_enhancement),
        );
    }
    out
}
