//! Independent oracles shared by the integration and acceptance suites.
//!
//! Both oracles deliberately avoid the algorithms used by the library:
//! the error function is summed as a series instead of the rational
//! approximation, and the discrepancy supremum is taken over all critical
//! points instead of the sorted-points formula.

/// Error function by the all-positive-term series
/// `erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_{n>=0} (2x^2)^n x / (2n+1)!!`.
///
/// Every term has the sign of `x`, so there is no cancellation; a few
/// hundred terms reach f64 precision for any argument of interest.
pub fn erf_series(x: f64) -> f64 {
    const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
    if x == 0.0 {
        return 0.0;
    }
    if x.abs() > 9.0 {
        // |erfc(9)| < 1e-36, far below f64 resolution around +-1
        return x.signum();
    }
    let z = x * x;
    let mut term = x;
    let mut sum = term;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * z / (2.0 * n as f64 + 1.0);
        let next = sum + term;
        if next == sum || n > 500 {
            break;
        }
        sum = next;
    }
    TWO_OVER_SQRT_PI * (-z).exp() * sum
}

/// Standard normal CDF built on the series oracle.
pub fn normal_cdf_series(x: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf_series(x / (sigma * std::f64::consts::SQRT_2)))
}

/// Star discrepancy by brute force: the supremum of `|empirical - t|`
/// over all critical points `t` in `{x_(i)} ∪ {i/N}`, probing both the
/// open and the closed count at each point.
pub fn star_discrepancy_brute_force(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let mut candidates: Vec<f64> = values.to_vec();
    candidates.extend((0..=values.len()).map(|i| i as f64 / n));
    let mut sup = 0.0f64;
    for &t in &candidates {
        let below = values.iter().filter(|&&x| x < t).count() as f64 / n;
        let at_or_below = values.iter().filter(|&&x| x <= t).count() as f64 / n;
        sup = sup.max((below - t).abs()).max((at_or_below - t).abs());
    }
    sup
}
