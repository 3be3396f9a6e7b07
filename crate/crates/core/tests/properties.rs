#![allow(clippy::needless_range_loop)]

mod common;

use pairscope::fock::{
    apply_loss, correlation_mean, correlation_second_moment, correlation_second_moment_expanded,
    CorrelationObservable, LossNetwork, PhotonNumberDistribution,
};
use proptest::prelude::*;

/// Random two-mode diagonal state: occupations up to `n_max` per mode with
/// positive weights, normalized.
fn two_mode_state(max_n: u32) -> impl Strategy<Value = PhotonNumberDistribution> {
    (1..=max_n).prop_flat_map(|n_max| {
        prop::collection::vec(((0..=n_max), (0..=n_max), 0.01f64..1.0), 1..12).prop_map(move |entries| {
            let total: f64 = entries.iter().map(|e| e.2).sum();
            let mut merged = std::collections::BTreeMap::new();
            for (a, b, w) in entries {
                *merged.entry(vec![a, b]).or_insert(0.0) += w / total;
            }
            PhotonNumberDistribution::from_entries(2, n_max, merged, 0.0).unwrap()
        })
    })
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loss_composes_multiplicatively(d in two_mode_state(6), t1 in unit(), t2 in unit(), s1 in unit(), s2 in unit()) {
        let once = apply_loss(&apply_loss(&d, &LossNetwork::new(vec![t1, t2]).unwrap()).unwrap(),
                              &LossNetwork::new(vec![s1, s2]).unwrap()).unwrap();
        let direct = apply_loss(&d, &LossNetwork::new(vec![t1 * s1, t2 * s2]).unwrap()).unwrap();
        prop_assert!(once.max_abs_difference(&direct) < 1e-12);
    }

    #[test]
    fn correlation_scales_with_transmittance(d in two_mode_state(6), t1 in unit(), t2 in unit(), k1 in 0u32..3, k2 in 1u32..3) {
        prop_assume!(k1 + k2 <= d.n_max());
        let obs = CorrelationObservable::new(vec![k1, k2]).unwrap();
        let before = correlation_mean(&d, &obs).unwrap();
        let after = correlation_mean(&apply_loss(&d, &LossNetwork::new(vec![t1, t2]).unwrap()).unwrap(), &obs).unwrap();
        let expected = t1.powi(k1 as i32) * t2.powi(k2 as i32) * before;
        prop_assert!((after - expected).abs() <= 1e-12 * before.max(1.0));
    }

    #[test]
    fn normal_order_expansion_matches_direct(d in two_mode_state(10), k1 in 0u32..=4, k2 in 1u32..=4) {
        prop_assume!(k1 + k2 <= d.n_max());
        let obs = CorrelationObservable::new(vec![k1, k2]).unwrap();
        let direct = correlation_second_moment(&d, &obs).unwrap();
        let expanded = correlation_second_moment_expanded(&d, &obs).unwrap();
        prop_assert!((direct - expanded).abs() <= 1e-10 * direct.max(1.0), "{direct} vs {expanded}");
    }

    #[test]
    fn loss_conserves_probability(d in two_mode_state(8), t1 in unit(), t2 in unit()) {
        let out = apply_loss(&d, &LossNetwork::new(vec![t1, t2]).unwrap()).unwrap();
        prop_assert!((out.total_probability() + out.truncation_deficit() - 1.0).abs() < 1e-12);
        prop_assert_eq!(out.truncation_deficit(), d.truncation_deficit());
    }

    #[test]
    fn thinning_matches_beam_splitter(d in two_mode_state(common::CUTOFF as u32), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let out = apply_loss(&d, &LossNetwork::new(vec![t1, t2]).unwrap()).unwrap();
        let (u1, u2) = (common::beam_splitter(t1), common::beam_splitter(t2));
        let n = common::CUTOFF;
        let mut oracle = vec![vec![0.0; n + 1]; n + 1];
        for (occ, p) in d.iter() {
            let o = common::two_mode_loss_oracle(occ[0] as usize, occ[1] as usize, &u1, &u2);
            for m1 in 0..=n {
                for m2 in 0..=n {
                    oracle[m1][m2] += p * o[m1][m2];
                }
            }
        }
        for m1 in 0..=n {
            for m2 in 0..=n {
                prop_assert!((out.probability(&[m1 as u32, m2 as u32]) - oracle[m1][m2]).abs() < 1e-12);
            }
        }
    }
}
