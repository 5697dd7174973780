//! Small numerical helpers: stable normal CDF arithmetic, truncated-normal
//! moments and inverse-CDF sampling, summary statistics and a chi-square
//! goodness-of-fit test.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::erf::erfc;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `Phi(hi) - Phi(lo)` computed in a tail-stable branch.
///
/// For arguments beyond +-6 the direct difference of CDFs loses all digits;
/// the erfc form keeps relative accuracy out to the far tails.
pub fn norm_cdf_diff(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= 0.0 {
        // both right tail: erfc decreasing
        0.5 * (erfc(lo / SQRT_2) - erfc(hi / SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (erfc(-hi / SQRT_2) - erfc(-lo / SQRT_2))
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    }
}

/// Standard normal quantile.
pub fn norm_inv_cdf(p: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    n.inverse_cdf(p.clamp(f64::MIN_POSITIVE, 1.0 - 1e-16))
}

/// Density at `a` of a Normal(mean, sd) truncated to `[lo, hi]`.
pub fn truncnorm_pdf(a: f64, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if a < lo || a > hi {
        return 0.0;
    }
    let z = norm_cdf_diff((lo - mean) / sd, (hi - mean) / sd);
    phi((a - mean) / sd) / (sd * z)
}

/// Mean of a Normal(mean, sd) truncated to `[lo, hi]`.
pub fn truncnorm_mean(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let alpha = (lo - mean) / sd;
    let beta = (hi - mean) / sd;
    let z = norm_cdf_diff(alpha, beta);
    mean + sd * (phi(alpha) - phi(beta)) / z
}

/// Inverse-CDF draw from Normal(mean, sd) truncated to `[lo, hi]`, driven by
/// a uniform `u` in [0,1).
pub fn truncnorm_inv(u: f64, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let a = norm_cdf((lo - mean) / sd);
    let b = norm_cdf((hi - mean) / sd);
    let x = mean + sd * norm_inv_cdf(a + u * (b - a));
    x.clamp(lo, hi)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the sample mean.
pub fn stderr_mean(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Binomial standard error for an empirical frequency `p` over `n` trials.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Chi-square goodness-of-fit p-value for observed counts against expected
/// probabilities. Cells with expected probability < 1e-12 are dropped.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0i64;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        if p < 1e-12 {
            continue;
        }
        let e = p * n as f64;
        stat += (o as f64 - e) * (o as f64 - e) / e;
        dof += 1;
    }
    dof -= 1;
    if dof <= 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(dof as f64).unwrap();
    1.0 - chi.cdf(stat)
}

/// Two-sample chi-square homogeneity p-value over shared categories.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut dof = 0i64;
    for (&oa, &ob) in a.iter().zip(b) {
        let col = (oa + ob) as f64;
        if col == 0.0 {
            continue;
        }
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        stat += (oa as f64 - ea) * (oa as f64 - ea) / ea;
        stat += (ob as f64 - eb) * (ob as f64 - eb) / eb;
        dof += 1;
    }
    dof -= 1;
    if dof <= 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(dof as f64).unwrap();
    1.0 - chi.cdf(stat)
}

/// `(e^c - 1)/c`, the integral of `e^{c a}` over `a` in [0,1].
pub fn expint(c: f64) -> f64 {
    if c.abs() < 1e-8 {
        1.0 + c / 2.0 + c * c / 6.0
    } else {
        (c.exp() - 1.0) / c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_diff_matches_naive_in_core() {
        for (lo, hi) in [(-1.0, 2.0), (0.5, 1.5), (-2.0, -0.5)] {
            let naive = norm_cdf(hi) - norm_cdf(lo);
            assert!((norm_cdf_diff(lo, hi) - naive).abs() < 1e-14);
        }
    }

    #[test]
    fn cdf_diff_far_tail_positive() {
        // Both arguments deep in the right tail: result is tiny but nonzero.
        let d = norm_cdf_diff(8.0, 9.0);
        assert!(d > 0.0 && d < 1e-14);
    }

    #[test]
    fn truncnorm_inverse_cdf_roundtrip() {
        let x = truncnorm_inv(0.5, 0.3, 0.2, 0.0, 1.0);
        assert!((0.0..=1.0).contains(&x));
        // median of the truncated law: CDF at x equals 0.5 of the truncated mass
        let a = norm_cdf((0.0 - 0.3) / 0.2);
        let b = norm_cdf((1.0 - 0.3) / 0.2);
        let p = (norm_cdf((x - 0.3) / 0.2) - a) / (b - a);
        assert!((p - 0.5).abs() < 1e-10);
    }

    #[test]
    fn expint_small_argument() {
        assert!((expint(1e-12) - 1.0).abs() < 1e-9);
        assert!((expint(1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_uniform_counts() {
        let p = chi_square_gof(&[250, 250, 250, 250], &[0.25; 4]);
        assert!(p > 0.99);
    }
}
