use std::collections::BTreeMap;

use super::{invalid, FockError, PhotonNumberDistribution};

/// Per-mode power transmittances of a passive loss network.
///
/// Each mode sees a beam splitter of transmittance `t_i` whose other input
/// port is vacuum; on photon-number statistics this is binomial thinning.
#[derive(Debug, Clone, PartialEq)]
pub struct LossNetwork {
    per_mode_t: Vec<f64>,
}

impl LossNetwork {
    pub fn new(per_mode_t: Vec<f64>) -> Result<Self, FockError> {
        if per_mode_t.is_empty() {
            return Err(invalid("per_mode_t", "needs at least one mode"));
        }
        for &t in &per_mode_t {
            if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
                return Err(invalid("transmittance", format!("{t} not in [0, 1]")));
            }
        }
        Ok(Self { per_mode_t })
    }

    pub fn uniform(mode_count: usize, t: f64) -> Result<Self, FockError> {
        Self::new(vec![t; mode_count])
    }

    pub fn transmittances(&self) -> &[f64] {
        &self.per_mode_t
    }

    pub fn mode_count(&self) -> usize {
        self.per_mode_t.len()
    }
}

/// `C(n, m) t^m (1-t)^(n-m)`.
pub fn binomial_pmf(n: u32, m: u32, t: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    let k = m.min(n - m);
    let mut c = 1.0;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    c * t.powi(m as i32) * (1.0 - t).powi((n - m) as i32)
}

/// Applies independent binomial thinning to every mode.
///
/// `P'(m) = Σ_{n ≥ m} P(n) Π_i C(n_i, m_i) t_i^{m_i} (1-t_i)^{n_i-m_i}`.
/// The truncation deficit is carried over unchanged.
pub fn apply_loss(
    dist: &PhotonNumberDistribution,
    loss: &LossNetwork,
) -> Result<PhotonNumberDistribution, FockError> {
    if loss.mode_count() != dist.mode_count() {
        return Err(FockError::ModeMismatch {
            expected: dist.mode_count(),
            got: loss.mode_count(),
        });
    }
    let mut current: BTreeMap<Vec<u32>, f64> =
        dist.iter().map(|(occ, p)| (occ.to_vec(), p)).collect();
    for (mode, &t) in loss.transmittances().iter().enumerate() {
        if t == 1.0 {
            continue;
        }
        let mut next = BTreeMap::new();
        for (occ, p) in current {
            let n = occ[mode];
            for m in 0..=n {
                let w = binomial_pmf(n, m, t);
                if w == 0.0 {
                    continue;
                }
                let mut o = occ.clone();
                o[mode] = m;
                *next.entry(o).or_insert(0.0) += p * w;
            }
        }
        current = next;
    }
    Ok(PhotonNumberDistribution::from_parts(
        dist.mode_count(),
        dist.n_max(),
        current,
        dist.truncation_deficit(),
    ))
}
