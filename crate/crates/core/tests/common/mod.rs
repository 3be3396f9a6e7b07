//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// Per-mode Fock cutoff of the beam-splitter oracle. Loss conserves the
/// photon number of a (mode, ancilla) pair, so any input with `n <= CUTOFF`
/// per mode lives entirely inside the truncated space and the result is
/// exact.
pub const CUTOFF: usize = 4;
const DIM: usize = CUTOFF + 1;

/// `exp(θ (a†c - a c†))` on a mode ⊗ vacuum-ancilla space with `cos²θ = t`.
/// Basis index is `a * DIM + c`.
pub fn beam_splitter(t: f64) -> DMatrix<f64> {
    let theta = t.sqrt().clamp(0.0, 1.0).acos();
    let n = DIM * DIM;
    let mut g = DMatrix::<f64>::zeros(n, n);
    for a in 0..DIM {
        for c in 0..DIM {
            let from = a * DIM + c;
            // a†c
            if c > 0 && a + 1 < DIM {
                g[((a + 1) * DIM + c - 1, from)] += ((a + 1) as f64).sqrt() * (c as f64).sqrt();
            }
            // -a c†
            if a > 0 && c + 1 < DIM {
                g[((a - 1) * DIM + c + 1, from)] -= (a as f64).sqrt() * ((c + 1) as f64).sqrt();
            }
        }
    }
    (g * theta).exp()
}

/// Output photon-number distribution of two modes with inputs `(n1, n2)`
/// after independent beam splitters, ancillas traced out.
/// Returned as a `DIM x DIM` table indexed `[m1][m2]`.
pub fn two_mode_loss_oracle(n1: usize, n2: usize, u1: &DMatrix<f64>, u2: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; DIM]; DIM];
    let col1 = u1.column(n1 * DIM);
    let col2 = u2.column(n2 * DIM);
    for m1 in 0..DIM {
        for m2 in 0..DIM {
            let mut p = 0.0;
            for c1 in 0..DIM {
                for c2 in 0..DIM {
                    let amp = col1[m1 * DIM + c1] * col2[m2 * DIM + c2];
                    p += amp * amp;
                }
            }
            out[m1][m2] = p;
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Closed form of the normal-order coefficients: `C(k,m)² (k-m)!`.
pub fn normal_order_closed_form(k: u64, m: u64) -> u64 {
    let b = binomial(k, m);
    b * b * factorial(k - m)
}

pub fn ff_int(n: i128, k: i128) -> i128 {
    (0..k).map(|i| n - i).product()
}

pub fn ideal_sp(t: f64) -> f64 {
    (t * (1.0 - t)).sqrt()
}

pub fn ideal_dp(t: f64) -> f64 {
    ((1.0 - t * t) / 2.0).sqrt()
}

pub fn coherent(t: f64) -> f64 {
    t.sqrt()
}

pub fn weak_sp(t: f64, beta: f64) -> f64 {
    (t - t * t * beta * beta).sqrt()
}

pub fn weak_dp(t: f64, beta: f64) -> f64 {
    ((1.0 - t * t * beta * beta) / 2.0).sqrt()
}

/// Analytic SNR ratio for Poisson pairs with matched photons, reference at
/// `t = 1`: `(1+t)^{3/2} / √(2(1+t²))`.
pub fn matched_snr_ratio(t: f64) -> f64 {
    (1.0 + t).powf(1.5) / (2.0 * (1.0 + t * t)).sqrt()
}
