use std::collections::BTreeMap;

use super::FockError;

/// Entries below this probability are dropped from every table.
pub const PRUNE_THRESHOLD: f64 = 1e-30;

/// Slack allowed on the normalization check, on top of the declared deficit.
const NORMALIZATION_SLACK: f64 = 1e-12;

/// Occupation numbers `(n_1, ..., n_M)`, one per mode.
pub type Occupation = Vec<u32>;

/// Joint photon-number distribution of `M` modes truncated at `n_max` photons
/// per mode.
///
/// The probability mass lost to truncation is carried as
/// [`truncation_deficit`](Self::truncation_deficit) and never renormalized
/// away, so moments computed from the table are exact lower bounds of the
/// untruncated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    mode_count: usize,
    n_max: u32,
    probs: BTreeMap<Occupation, f64>,
    deficit: f64,
}

impl PhotonNumberDistribution {
    /// Builds a table from explicit entries. Duplicate occupations are summed.
    pub fn from_entries<I>(
        mode_count: usize,
        n_max: u32,
        entries: I,
        deficit: f64,
    ) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (Occupation, f64)>,
    {
        if mode_count == 0 {
            return Err(super::invalid("mode_count", "must be at least 1"));
        }
        if !(deficit.is_finite() && (0.0..=1.0).contains(&deficit)) {
            return Err(super::invalid("deficit", format!("{deficit} not in [0, 1]")));
        }
        let mut probs = BTreeMap::new();
        for (occ, p) in entries {
            if occ.len() != mode_count {
                return Err(FockError::ModeMismatch {
                    expected: mode_count,
                    got: occ.len(),
                });
            }
            if occ.iter().any(|&n| n > n_max) {
                return Err(FockError::OccupationOutOfRange {
                    occupation: occ,
                    n_max,
                });
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(super::invalid("probability", format!("{p} for {occ:?}")));
            }
            *probs.entry(occ).or_insert(0.0) += p;
        }
        let dist = Self::from_parts(mode_count, n_max, probs, deficit);
        let sum = dist.total_probability();
        if sum > 1.0 + NORMALIZATION_SLACK || sum < 1.0 - deficit - NORMALIZATION_SLACK {
            return Err(FockError::Normalization { sum, deficit });
        }
        Ok(dist)
    }

    /// Internal constructor for tables produced by exact channels; prunes but
    /// does not re-validate.
    pub(crate) fn from_parts(
        mode_count: usize,
        n_max: u32,
        mut probs: BTreeMap<Occupation, f64>,
        deficit: f64,
    ) -> Self {
        probs.retain(|_, p| *p >= PRUNE_THRESHOLD);
        Self {
            mode_count,
            n_max,
            probs,
            deficit,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Probability mass that the truncated table is known to be missing.
    pub fn truncation_deficit(&self) -> f64 {
        self.deficit
    }

    /// Probability of an occupation tuple, zero when absent.
    pub fn probability(&self, occupation: &[u32]) -> f64 {
        self.probs.get(occupation).copied().unwrap_or(0.0)
    }

    /// Stored entries in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.probs.iter().map(|(k, &p)| (k.as_slice(), p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sum of stored probabilities, accumulated with Neumaier compensation.
    pub fn total_probability(&self) -> f64 {
        crate::stats::compensated_sum(self.probs.values().copied())
    }

    /// Photon-number distribution of one mode, indexed by photon number.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        if mode >= self.mode_count {
            return Err(FockError::ModeIndex {
                index: mode,
                mode_count: self.mode_count,
            });
        }
        let mut out = vec![0.0; self.n_max as usize + 1];
        for (occ, p) in self.iter() {
            out[occ[mode] as usize] += p;
        }
        Ok(out)
    }

    /// Same table with a larger truncation bound. Never shrinks.
    pub fn with_n_max(mut self, n_max: u32) -> Self {
        self.n_max = self.n_max.max(n_max);
        self
    }

    /// Largest absolute difference between two tables over the union of
    /// their supports.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (occ, p) in self.iter() {
            worst = worst.max((p - other.probability(occ)).abs());
        }
        for (occ, q) in other.iter() {
            if !self.probs.contains_key(occ) {
                worst = worst.max(q);
            }
        }
        worst
    }
}
