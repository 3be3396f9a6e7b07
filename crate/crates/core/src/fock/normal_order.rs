//! Coefficients that bring the square of a normally ordered power back to
//! normal order:
//!
//! `((a†)^k a^k)² = Σ_{m=0}^{k} C_{k,m} (a†)^{k+m} a^{k+m}`.
//!
//! On a Fock state `|n⟩` both sides are diagonal, so the identity is
//! `FF(n,k)² = Σ_m C_{k,m} FF(n,k+m)` for every `n ≥ 0`. The coefficients are
//! obtained by solving that system exactly at `n = k, ..., 2k`, where it is
//! lower triangular, and then checked at `n = 0, ..., 2k+2`.

use super::FockError;

/// Largest `k` for which the integer solve is guaranteed not to overflow.
pub const MAX_NORMAL_ORDER: u32 = 10;

fn ff_exact(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1i128, |acc, i| acc * i128::from(n - i))
}

/// Exact `C_{k,m}` for `m = 0..=k`. `k = 0` yields `[1]`.
pub fn normal_order_coefficients(k: u32) -> Result<Vec<u64>, FockError> {
    if k > MAX_NORMAL_ORDER {
        return Err(FockError::OrderOutOfRange(k));
    }
    let mut coeffs: Vec<i128> = Vec::with_capacity(k as usize + 1);
    for m in 0..=k {
        let n = k + m;
        let lhs = ff_exact(n, k).pow(2);
        let known: i128 = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * ff_exact(n, k + j as u32))
            .sum();
        let pivot = ff_exact(n, n);
        let rest = lhs - known;
        debug_assert_eq!(rest % pivot, 0, "non-integral normal-order coefficient");
        coeffs.push(rest / pivot);
    }
    let coeffs: Vec<u64> = coeffs
        .into_iter()
        .map(|c| u64::try_from(c).expect("normal-order coefficients are non-negative"))
        .collect();
    debug_assert!(verify_normal_order(k, &coeffs));
    Ok(coeffs)
}

/// Checks `FF(n,k)² = Σ_m C_{k,m} FF(n,k+m)` in integer arithmetic for
/// `n = 0..=2k+2`.
pub fn verify_normal_order(k: u32, coeffs: &[u64]) -> bool {
    if coeffs.len() != k as usize + 1 {
        return false;
    }
    (0..=2 * k + 2).all(|n| {
        let rhs: i128 = coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| i128::from(c) * ff_exact(n, k + m as u32))
            .sum();
        ff_exact(n, k).pow(2) == rhs
    })
}
