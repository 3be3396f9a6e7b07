use std::collections::BTreeMap;

use super::{invalid, FockError, Occupation, PhotonNumberDistribution};

/// Illumination sources, each expanding to a diagonal photon-number table.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// Exactly one photon in each of two modes, `|1,1⟩`.
    IdealPair,
    /// Low-gain down-conversion truncated at one pair: `α|0,0⟩ + β|1,1⟩`.
    WeakSpdc { beta: f64 },
    /// Two-mode squeezed vacuum `(1-β²)^{1/2} Σ β^n |n,n⟩`, kept up to `n_max` pairs.
    TwoModeSqueezed { beta: f64, n_max: u32 },
    /// Independent coherent states with Poisson(`mean_photons`) statistics in
    /// each of `modes` modes.
    Coherent { mean_photons: f64, modes: usize },
    /// `N`-mode correlated state `Σ β_n |n,...,n⟩` with `P(n) = (1-β²) β^{2n}`.
    MultiModeCorrelated { modes: usize, beta: f64, n_max: u32 },
}

impl SourceModel {
    pub fn mode_count(&self) -> usize {
        match self {
            Self::IdealPair | Self::WeakSpdc { .. } | Self::TwoModeSqueezed { .. } => 2,
            Self::Coherent { modes, .. } => *modes,
            Self::MultiModeCorrelated { modes, .. } => *modes,
        }
    }

    /// Smallest useful truncation for observables of total order `order_sum`.
    ///
    /// Coherent sources are cut at `λ + 12√λ + 12`, far past where any
    /// moment used here is affected.
    pub fn default_truncation(&self, order_sum: u32) -> u32 {
        let own = match self {
            Self::IdealPair | Self::WeakSpdc { .. } => 1,
            Self::TwoModeSqueezed { n_max, .. } | Self::MultiModeCorrelated { n_max, .. } => {
                *n_max
            }
            Self::Coherent { mean_photons, .. } => {
                let lam = mean_photons.max(0.0);
                (lam + 12.0 * lam.sqrt() + 12.0).ceil() as u32
            }
        };
        own.max(order_sum).max(1)
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let check_beta = |beta: f64| {
            if beta.is_finite() && beta > 0.0 && beta < 1.0 {
                Ok(())
            } else {
                Err(invalid("beta", format!("{beta} not in (0, 1)")))
            }
        };
        match *self {
            Self::IdealPair => Ok(()),
            Self::WeakSpdc { beta } | Self::TwoModeSqueezed { beta, .. } => check_beta(beta),
            Self::Coherent {
                mean_photons,
                modes,
            } => {
                if modes == 0 {
                    return Err(invalid("modes", "coherent source needs at least one mode"));
                }
                if mean_photons.is_finite() && mean_photons > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("mean_photons", format!("{mean_photons} must be positive")))
                }
            }
            Self::MultiModeCorrelated { modes, beta, .. } => {
                if modes < 2 {
                    return Err(invalid("modes", "correlated source needs at least two modes"));
                }
                check_beta(beta)
            }
        }
    }
}

/// Expands a source into its photon-number table, truncated at `n_max`.
pub fn expand_source(
    source: &SourceModel,
    n_max: u32,
) -> Result<PhotonNumberDistribution, FockError> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    source.validate()?;
    let modes = source.mode_count();
    match *source {
        SourceModel::IdealPair => {
            PhotonNumberDistribution::from_entries(2, n_max, [(vec![1, 1], 1.0)], 0.0)
        }
        SourceModel::WeakSpdc { beta } => {
            let b2 = beta * beta;
            PhotonNumberDistribution::from_entries(
                2,
                n_max,
                [(vec![0, 0], 1.0 - b2), (vec![1, 1], b2)],
                0.0,
            )
        }
        SourceModel::TwoModeSqueezed { beta, n_max: cut }
        | SourceModel::MultiModeCorrelated {
            beta, n_max: cut, ..
        } => {
            let cut = cut.min(n_max);
            let b2 = beta * beta;
            let entries = (0..=cut).map(|n| (vec![n; modes], (1.0 - b2) * b2.powi(n as i32)));
            // Tail of the geometric series past the cutoff.
            let deficit = b2.powi(cut as i32 + 1);
            PhotonNumberDistribution::from_entries(modes, n_max, entries, deficit)
        }
        SourceModel::Coherent { mean_photons, .. } => {
            let pmf = poisson_pmf(mean_photons, n_max);
            let mut probs: BTreeMap<Occupation, f64> = BTreeMap::new();
            probs.insert(Vec::new(), 1.0);
            for _ in 0..modes {
                let mut next = BTreeMap::new();
                for (occ, p) in &probs {
                    for (n, q) in pmf.iter().enumerate() {
                        let v = p * q;
                        if v >= super::PRUNE_THRESHOLD {
                            let mut o = occ.clone();
                            o.push(n as u32);
                            next.insert(o, v);
                        }
                    }
                }
                probs = next;
            }
            let kept: f64 = crate::stats::compensated_sum(probs.values().copied());
            let deficit = (1.0 - kept).clamp(0.0, 1.0);
            Ok(PhotonNumberDistribution::from_parts(modes, n_max, probs, deficit))
        }
    }
}

/// Poisson probabilities `P(0..=n_max)`, evaluated in log space.
fn poisson_pmf(lambda: f64, n_max: u32) -> Vec<f64> {
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0;
    (0..=n_max)
        .map(|n| {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            (n as f64 * ln_lambda - lambda - ln_fact).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_pair_is_single_entry() {
        let d = expand_source(&SourceModel::IdealPair, 2).unwrap();
        assert_eq!(d.probability(&[1, 1]), 1.0);
        assert_eq!(d.len(), 1);
        assert_eq!(d.truncation_deficit(), 0.0);
    }

    #[test]
    fn weak_spdc_at_experimental_beta() {
        let d = expand_source(&SourceModel::WeakSpdc { beta: 0.01 }, 2).unwrap();
        assert!((d.probability(&[0, 0]) - 0.9999).abs() < 1e-15);
        assert!((d.probability(&[1, 1]) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn squeezed_partial_sums_and_deficit() {
        let d = expand_source(
            &SourceModel::TwoModeSqueezed {
                beta: 0.5,
                n_max: 3,
            },
            3,
        )
        .unwrap();
        for n in 0..=3u32 {
            let expected = 0.75 * 0.25f64.powi(n as i32);
            assert!((d.probability(&[n, n]) - expected).abs() < 1e-15);
        }
        // Σ_{n≥4} 0.75·0.25ⁿ = 0.25⁴
        let tail = 0.25f64.powi(4) * 0.75 / (1.0 - 0.25);
        assert!((d.truncation_deficit() - tail).abs() < 1e-15);
        assert!((d.total_probability() + d.truncation_deficit() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_is_product_of_poissons() {
        let d = expand_source(
            &SourceModel::Coherent {
                mean_photons: 1.5,
                modes: 2,
            },
            20,
        )
        .unwrap();
        let p1 = (-1.5f64).exp() * 1.5;
        let p2 = (-1.5f64).exp() * 1.5 * 1.5 / 2.0;
        assert!((d.probability(&[1, 2]) - p1 * p2).abs() < 1e-15);
        assert!(d.truncation_deficit() < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(expand_source(&SourceModel::WeakSpdc { beta: 0.0 }, 2).is_err());
        assert!(expand_source(&SourceModel::WeakSpdc { beta: 1.0 }, 2).is_err());
        assert!(expand_source(&SourceModel::WeakSpdc { beta: f64::NAN }, 2).is_err());
        assert!(expand_source(&SourceModel::IdealPair, 0).is_err());
        assert!(expand_source(
            &SourceModel::Coherent {
                mean_photons: -1.0,
                modes: 1
            },
            5
        )
        .is_err());
        assert!(expand_source(
            &SourceModel::MultiModeCorrelated {
                modes: 1,
                beta: 0.1,
                n_max: 2
            },
            2
        )
        .is_err());
    }

    #[test]
    fn multimode_correlated_populates_diagonal() {
        let d = expand_source(
            &SourceModel::MultiModeCorrelated {
                modes: 3,
                beta: 0.1,
                n_max: 3,
            },
            3,
        )
        .unwrap();
        assert_eq!(d.mode_count(), 3);
        assert!((d.probability(&[2, 2, 2]) - 0.99 * 1e-4).abs() < 1e-18);
        assert!((d.truncation_deficit() - 1e-8).abs() < 1e-20);
    }
}
