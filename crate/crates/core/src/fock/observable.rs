use super::{invalid, normal_order_coefficients, FockError, PhotonNumberDistribution};
use crate::stats::compensated_sum;

/// `n (n-1) ... (n-k+1)`, the eigenvalue of `(a†)^k a^k` on `|n⟩`.
pub fn falling_factorial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i))
}

/// `O = Π_i (b_i†)^{k_i} b_i^{k_i}`, a product of normally ordered
/// correlation operators with one order per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorrelationObservable {
    orders: Vec<u32>,
}

impl CorrelationObservable {
    pub fn new(orders: Vec<u32>) -> Result<Self, FockError> {
        if orders.iter().all(|&k| k == 0) {
            return Err(FockError::InvalidObservable {
                orders,
                reason: "at least one order must be >= 1".into(),
            });
        }
        Ok(Self { orders })
    }

    /// First-order coincidence on every one of `modes` modes.
    pub fn coincidence(modes: usize) -> Self {
        Self {
            orders: vec![1; modes],
        }
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order_sum(&self) -> u32 {
        self.orders.iter().sum()
    }

    /// Checks dimensions and that `Σ k_i ≤ n_max`.
    pub fn check_against(&self, dist: &PhotonNumberDistribution) -> Result<(), FockError> {
        if self.orders.len() != dist.mode_count() {
            return Err(FockError::ModeMismatch {
                expected: dist.mode_count(),
                got: self.orders.len(),
            });
        }
        if self.order_sum() > dist.n_max() {
            return Err(FockError::InvalidObservable {
                orders: self.orders.clone(),
                reason: format!(
                    "total order {} exceeds truncation n_max={}",
                    self.order_sum(),
                    dist.n_max()
                ),
            });
        }
        Ok(())
    }

    fn eigenvalue(&self, occupation: &[u32]) -> f64 {
        occupation
            .iter()
            .zip(&self.orders)
            .map(|(&n, &k)| falling_factorial(n, k))
            .product()
    }
}

/// `⟨O⟩ = Σ_n P(n) Π_i FF(n_i, k_i)`.
pub fn correlation_mean(
    dist: &PhotonNumberDistribution,
    obs: &CorrelationObservable,
) -> Result<f64, FockError> {
    obs.check_against(dist)?;
    Ok(raw_moment(dist, obs.orders(), 1))
}

/// `⟨O²⟩ = Σ_n P(n) [Π_i FF(n_i, k_i)]²`, evaluated directly on the diagonal.
pub fn correlation_second_moment(
    dist: &PhotonNumberDistribution,
    obs: &CorrelationObservable,
) -> Result<f64, FockError> {
    obs.check_against(dist)?;
    Ok(raw_moment(dist, obs.orders(), 2))
}

/// `⟨O²⟩` through the normal-order expansion
/// `Σ_{m} Π_i C_{k_i,m_i} ⟨Π_i (a_i†)^{k_i+m_i} a_i^{k_i+m_i}⟩`.
///
/// Independent of [`correlation_second_moment`]; the two must agree.
pub fn correlation_second_moment_expanded(
    dist: &PhotonNumberDistribution,
    obs: &CorrelationObservable,
) -> Result<f64, FockError> {
    obs.check_against(dist)?;
    let tables = obs
        .orders()
        .iter()
        .map(|&k| normal_order_coefficients(k))
        .collect::<Result<Vec<_>, _>>()?;
    // Odometer over (m_1, ..., m_M), m_i in 0..=k_i.
    let mut shifts = vec![0u32; tables.len()];
    let mut terms = Vec::new();
    loop {
        let weight: f64 = tables
            .iter()
            .zip(&shifts)
            .map(|(c, &m)| c[m as usize] as f64)
            .product();
        let orders: Vec<u32> = obs.orders().iter().zip(&shifts).map(|(k, m)| k + m).collect();
        terms.push(weight * raw_moment(dist, &orders, 1));
        let mut i = 0;
        loop {
            if i == shifts.len() {
                return Ok(compensated_sum(terms));
            }
            if shifts[i] < obs.orders()[i] {
                shifts[i] += 1;
                break;
            }
            shifts[i] = 0;
            i += 1;
        }
    }
}

fn raw_moment(dist: &PhotonNumberDistribution, orders: &[u32], power: i32) -> f64 {
    let obs = CorrelationObservable {
        orders: orders.to_vec(),
    };
    compensated_sum(
        dist.iter()
            .map(|(occ, p)| p * obs.eigenvalue(occ).powi(power)),
    )
}

/// `Σ_{j ∈ modes} ⟨n_j⟩`.
pub fn mean_photon_number(
    dist: &PhotonNumberDistribution,
    modes: &[usize],
) -> Result<f64, FockError> {
    if modes.is_empty() {
        return Err(invalid("modes", "subset must be non-empty"));
    }
    if let Some(&bad) = modes.iter().find(|&&j| j >= dist.mode_count()) {
        return Err(FockError::ModeIndex {
            index: bad,
            mode_count: dist.mode_count(),
        });
    }
    Ok(compensated_sum(dist.iter().map(|(occ, p)| {
        p * modes.iter().map(|&j| f64::from(occ[j])).sum::<f64>()
    })))
}

#[cfg(test)]
mod tests {
    use super::super::{apply_loss, expand_source, LossNetwork, SourceModel};
    use super::*;

    fn point(occ: Vec<u32>, n_max: u32) -> PhotonNumberDistribution {
        PhotonNumberDistribution::from_entries(occ.len(), n_max, [(occ, 1.0)], 0.0).unwrap()
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(5, 0), 1.0);
        assert_eq!(falling_factorial(5, 2), 20.0);
        assert_eq!(falling_factorial(2, 3), 0.0);
    }

    #[test]
    fn pair_coincidence_mean_and_square() {
        let d = point(vec![1, 1], 2);
        let o = CorrelationObservable::coincidence(2);
        assert_eq!(correlation_mean(&d, &o).unwrap(), 1.0);
        assert_eq!(correlation_second_moment(&d, &o).unwrap(), 1.0);
    }

    #[test]
    fn lossy_pair_mean_and_variance() {
        let t2 = 0.37;
        let d = apply_loss(&point(vec![1, 1], 2), &LossNetwork::new(vec![1.0, t2]).unwrap())
            .unwrap();
        let o = CorrelationObservable::coincidence(2);
        let mean = correlation_mean(&d, &o).unwrap();
        let second = correlation_second_moment(&d, &o).unwrap();
        assert!((mean - t2).abs() < 1e-15);
        assert!((second - t2).abs() < 1e-15);
        assert!((second - mean * mean - t2 * (1.0 - t2)).abs() < 1e-15);
    }

    #[test]
    fn higher_order_on_fock_states() {
        let o22 = CorrelationObservable::new(vec![2, 2]).unwrap();
        assert_eq!(correlation_mean(&point(vec![2, 2], 4), &o22).unwrap(), 4.0);
        let o11 = CorrelationObservable::coincidence(2);
        let d33 = point(vec![3, 3], 3);
        assert_eq!(correlation_second_moment(&d33, &o11).unwrap(), 81.0);
        assert_eq!(correlation_second_moment_expanded(&d33, &o11).unwrap(), 81.0);
    }

    #[test]
    fn observable_validation() {
        assert!(CorrelationObservable::new(vec![0, 0]).is_err());
        let o = CorrelationObservable::new(vec![2, 1]).unwrap();
        assert!(o.check_against(&point(vec![1, 1], 2)).is_err());
        assert!(o.check_against(&point(vec![1, 1], 3)).is_ok());
        assert!(o.check_against(&point(vec![1, 1, 1], 3)).is_err());
    }

    #[test]
    fn mean_photon_numbers() {
        let d = point(vec![1, 1], 2);
        assert_eq!(mean_photon_number(&d, &[0, 1]).unwrap(), 2.0);
        let weak = expand_source(&SourceModel::WeakSpdc { beta: 0.01 }, 2).unwrap();
        assert!((mean_photon_number(&weak, &[1]).unwrap() - 1e-4).abs() < 1e-18);
        let coh = expand_source(
            &SourceModel::Coherent {
                mean_photons: 2.5,
                modes: 1,
            },
            20,
        )
        .unwrap();
        let m = mean_photon_number(&coh, &[0]).unwrap();
        assert!(m <= 2.5 && 2.5 - m < 1e-6);
        assert!(mean_photon_number(&d, &[]).is_err());
        assert!(mean_photon_number(&d, &[2]).is_err());
    }
}
