//! Small numerical helpers shared by the engines.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and unbiased variance of non-negative integer counts.
///
/// Sums are accumulated exactly in `u128`, so the result does not depend on
/// the order in which samples were produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountStats {
    pub n: usize,
    pub mean: f64,
    /// Divisor `n - 1`; zero when `n < 2`.
    pub variance: f64,
}

impl CountStats {
    pub fn from_counts(counts: &[u64]) -> Self {
        let n = counts.len();
        let (s1, s2) = counts.iter().fold((0u128, 0u128), |(a, b), &x| {
            let x = u128::from(x);
            (a + x, b + x * x)
        });
        Self::from_sums(n as u128, s1, s2)
    }

    pub(crate) fn from_sums(n: u128, s1: u128, s2: u128) -> Self {
        if n == 0 {
            return Self {
                n: 0,
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = s1 as f64 / n as f64;
        let variance = if n < 2 {
            0.0
        } else {
            // n Σx² - (Σx)² is exact and non-negative.
            let num = n * s2 - s1 * s1;
            num as f64 / (n as f64 * (n - 1) as f64)
        };
        Self {
            n: n as usize,
            mean,
            variance,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Sample standard deviation (divisor `n - 1`) of real values.
pub fn sample_std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (ss / (n - 1) as f64).sqrt()
}

/// Formats a float with 17 significant digits, which round-trips exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(vals), 2e-16);
    }

    #[test]
    fn count_stats_match_textbook() {
        let s = CountStats::from_counts(&[2, 4, 4, 4, 5, 5, 7, 9]);
        assert_eq!(s.mean, 5.0);
        assert!((s.variance - 32.0 / 7.0).abs() < 1e-15);
        let single = CountStats::from_counts(&[3]);
        assert_eq!(single.variance, 0.0);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02214076e23] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(f64::NAN), "");
    }
}
