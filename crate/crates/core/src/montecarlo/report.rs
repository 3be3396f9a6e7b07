use super::{run_counting, ExperimentConfig, McError};
use crate::fock::{
    apply_loss, correlation_mean, mean_photon_number, CorrelationObservable, LossNetwork,
    PhotonNumberDistribution,
};

/// Exact per-dwell count moments predicted by the photon-number engine.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCounts {
    pub coincidence_mean: f64,
    /// A thinned Poisson process is Poisson, so this equals the mean.
    pub coincidence_variance: f64,
    pub singles_mean: Vec<f64>,
}

/// Thins a single event (one photon per mode) by the configured
/// transmittances and scales by the Poisson event rate.
pub fn analytic_counts(cfg: &ExperimentConfig) -> Result<AnalyticCounts, McError> {
    cfg.validate()?;
    let modes = cfg.mode_count();
    let event = PhotonNumberDistribution::from_entries(modes, modes as u32, [(vec![1; modes], 1.0)], 0.0)?;
    let thinned = apply_loss(&event, &LossNetwork::new(cfg.mode_transmittances())?)?;
    let clicks: Vec<u32> = (0..modes)
        .map(|i| u32::from(cfg.scheme.orders.orders()[i] > 0))
        .collect();
    let p = correlation_mean(&thinned, &CorrelationObservable::new(clicks)?)?;
    let lambda = cfg.pairs_mean_per_dwell;
    let singles_mean = (0..modes)
        .map(|i| {
            mean_photon_number(&thinned, &[i]).map(|m| lambda * m + cfg.background_singles_mean)
        })
        .collect::<Result<_, _>>()?;
    Ok(AnalyticCounts {
        coincidence_mean: lambda * p,
        coincidence_variance: lambda * p,
        singles_mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub replicate: usize,
    pub statistic: String,
    pub empirical: f64,
    pub analytic: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Fraction of rows with `|z| < bound`.
    pub fn fraction_within(&self, bound: f64) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let ok = self.rows.iter().filter(|r| r.z.abs() < bound).count();
        ok as f64 / self.rows.len() as f64
    }
}

fn z_score(empirical: f64, analytic: f64, std_error: f64) -> f64 {
    if std_error > 0.0 {
        (empirical - analytic) / std_error
    } else if empirical == analytic {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs `reps` independent replicates of `cfg` and scores each empirical
/// statistic against its analytic value.
///
/// Replicate `r` uses seed `cfg.rng_seed + r`. Standard errors assume the
/// Poisson law of the analytic model: `√(μ/n)` for means and
/// `√((μ₄ - σ⁴ (n-3)/(n-1)) / n)` with `μ₄ = μ(1 + 3μ)` for the variance.
pub fn mc_vs_analytic_report(cfg: &ExperimentConfig, reps: usize) -> Result<ConvergenceTable, McError> {
    if reps < 10 {
        return Err(McError::InvalidConfig(format!("need at least 10 replicates, got {reps}")));
    }
    let analytic = analytic_counts(cfg)?;
    let n = cfg.dwells as f64;
    let mut table = ConvergenceTable::default();
    for r in 0..reps {
        let rec = run_counting(&cfg.with_seed(cfg.rng_seed.wrapping_add(r as u64)))?;
        let mut push = |statistic: String, empirical: f64, analytic: f64, std_error: f64| {
            table.rows.push(ConvergenceRow {
                replicate: r,
                statistic,
                empirical,
                analytic,
                std_error,
                z: z_score(empirical, analytic, std_error),
            });
        };
        let c = rec.coincidence_stats();
        let mu = analytic.coincidence_mean;
        push("coincidence_mean".into(), c.mean, mu, (mu / n).sqrt());
        let mu4 = mu * (1.0 + 3.0 * mu);
        let var_se = ((mu4 - mu * mu * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
        push("coincidence_variance".into(), c.variance, analytic.coincidence_variance, var_se);
        for (i, &m) in analytic.singles_mean.iter().enumerate() {
            push(format!("singles_{}_mean", i + 1), rec.singles_stats(i).mean, m, (m / n).sqrt());
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SourceModel;
    use crate::precision::{Scheme, SchemeConfig};

    fn cfg(scheme: Scheme, t: f64, dwells: usize) -> ExperimentConfig {
        ExperimentConfig::new(
            SourceModel::IdealPair,
            SchemeConfig::coincidence(scheme, t, 2),
            12.0,
            dwells,
            11,
        )
        .unwrap()
    }

    #[test]
    fn analytic_means_follow_power_law() {
        let a = analytic_counts(&cfg(Scheme::SinglePass, 0.6, 10)).unwrap();
        assert!((a.coincidence_mean - 12.0 * 0.6).abs() < 1e-12);
        assert!((a.singles_mean[0] - 12.0).abs() < 1e-12);
        let a = analytic_counts(&cfg(Scheme::DoublePass, 0.6, 10)).unwrap();
        assert!((a.coincidence_mean - 12.0 * 0.36).abs() < 1e-12);
    }

    #[test]
    fn report_scores_are_mostly_small() {
        let table = mc_vs_analytic_report(&cfg(Scheme::DoublePass, 0.8, 20_000), 10).unwrap();
        assert_eq!(table.rows.len(), 40);
        assert!(table.fraction_within(4.0) >= 0.95, "{table:?}");
    }

    #[test]
    fn thinned_poisson_variance_equals_mean() {
        let rec = run_counting(&cfg(Scheme::SinglePass, 0.5, 50_000)).unwrap();
        let s = rec.coincidence_stats();
        // Var(s²) ≈ (μ + 2μ²)/n for Poisson(μ).
        let se = ((6.0 + 2.0 * 36.0) / 50_000f64).sqrt();
        assert!((s.variance - s.mean).abs() < 4.0 * se, "{s:?}");
    }

    #[test]
    fn lossless_variance_is_pair_variance() {
        let rec = run_counting(&cfg(Scheme::DoublePass, 1.0, 2_000)).unwrap();
        let pairs = rec.singles_stats(0);
        let coinc = rec.coincidence_stats();
        assert_eq!(pairs, coinc);
    }

    #[test]
    fn rejects_too_few_replicates() {
        assert!(mc_vs_analytic_report(&cfg(Scheme::SinglePass, 0.5, 10), 9).is_err());
    }
}
