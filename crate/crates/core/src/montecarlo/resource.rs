use super::{ExperimentConfig, McError};

/// Relative mismatch of launched photons tolerated between matched runs.
pub const RESOURCE_MATCH_TOLERANCE: f64 = 1e-3;

/// Single-pass and double-pass (or multi-pass) runs that launch the same
/// expected number of photons onto the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub single_pass: ExperimentConfig,
    pub multi_pass: ExperimentConfig,
}

impl MatchedPair {
    pub fn launched_photons(&self) -> (f64, f64) {
        (
            self.single_pass.launched_photons(),
            self.multi_pass.launched_photons(),
        )
    }

    pub fn relative_mismatch(&self) -> f64 {
        let (a, b) = self.launched_photons();
        (a - b).abs() / a.max(b)
    }
}

/// Rescales the event rate of `multi` so both runs launch equal photon
/// numbers onto the sample.
///
/// A double-pass event puts two photons on the sample and a single-pass event
/// one, so at equal dwell counts the double-pass dwell time is halved.
pub fn resource_matched_pair(
    single: &ExperimentConfig,
    multi: &ExperimentConfig,
) -> Result<MatchedPair, McError> {
    single.validate()?;
    multi.validate()?;
    if single.source != multi.source {
        return Err(McError::ResourceMismatch("runs use different sources".into()));
    }
    if single.scheme.sample_t != multi.scheme.sample_t {
        return Err(McError::ResourceMismatch(format!(
            "sample transmittance differs: {} vs {}",
            single.scheme.sample_t, multi.scheme.sample_t
        )));
    }
    let target = single.launched_photons();
    let per_dwell = multi.dwells as f64 * multi.photons_on_sample_per_event() as f64;
    let rate = target / per_dwell;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(McError::ResourceMismatch(format!("matched rate {rate} is not positive")));
    }
    let pair = MatchedPair {
        single_pass: single.clone(),
        multi_pass: multi.with_pairs_mean(rate),
    };
    debug_assert!(pair.relative_mismatch() < RESOURCE_MATCH_TOLERANCE);
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SourceModel;
    use crate::precision::{Scheme, SchemeConfig};

    fn cfg(scheme: Scheme, lambda: f64, dwells: usize) -> ExperimentConfig {
        ExperimentConfig::new(
            SourceModel::WeakSpdc { beta: 0.01 },
            SchemeConfig::coincidence(scheme, 0.98, 2),
            lambda,
            dwells,
            1,
        )
        .unwrap()
    }

    #[test]
    fn swapping_scheme_halves_dwell_time() {
        let sp = cfg(Scheme::SinglePass, 5000.0, 100);
        let m = resource_matched_pair(&sp, &cfg(Scheme::DoublePass, 5000.0, 100)).unwrap();
        assert_eq!(m.multi_pass.pairs_mean_per_dwell, 2500.0);
        assert!(m.relative_mismatch() < RESOURCE_MATCH_TOLERANCE);
    }

    #[test]
    fn different_dwell_counts_are_matched_through_rate() {
        let sp = cfg(Scheme::SinglePass, 5000.0, 300);
        let m = resource_matched_pair(&sp, &cfg(Scheme::DoublePass, 1.0, 200)).unwrap();
        assert!((m.multi_pass.pairs_mean_per_dwell - 3750.0).abs() < 1e-9);
        let (a, b) = m.launched_photons();
        assert!((a - b).abs() / a < RESOURCE_MATCH_TOLERANCE);
    }

    #[test]
    fn rejects_mismatched_sample() {
        let sp = cfg(Scheme::SinglePass, 5000.0, 100);
        let dp = cfg(Scheme::DoublePass, 5000.0, 100).with_sample_t(0.5);
        assert!(matches!(
            resource_matched_pair(&sp, &dp),
            Err(McError::ResourceMismatch(_))
        ));
        let other = ExperimentConfig::new(
            SourceModel::IdealPair,
            SchemeConfig::coincidence(Scheme::DoublePass, 0.98, 2),
            1.0,
            100,
            1,
        )
        .unwrap();
        assert!(resource_matched_pair(&sp, &other).is_err());
    }
}
