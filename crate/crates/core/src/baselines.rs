//! Textbook tests for `H0: theta = theta0`, read as plausibility functions.

use crate::dist::PoissonParam;
use crate::error::Result;

/// `Phi(z)` through the complementary error function.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `p1 = 2 - 2 Phi(|x - theta0| / sqrt(theta0))`, from `X ~ N(theta, theta)`.
pub fn normal_approx_pvalue(x: u64, theta0: f64) -> Result<f64> {
    let theta0 = PoissonParam::new(theta0)?.get();
    let z = (x as f64 - theta0).abs() / theta0.sqrt();
    // 2 (1 - Phi(z)) = erfc(z / sqrt 2)
    Ok(libm::erfc(z / std::f64::consts::SQRT_2))
}

/// Poisson equal-tail p-value `2 min{F(x), 1 - F(x-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualTail {
    /// The formula as written; can exceed one near the mode.
    pub raw: f64,
    /// `min(1, raw)`.
    pub capped: f64,
}

pub fn equal_tail_pvalue(x: u64, theta0: f64) -> Result<EqualTail> {
    let p = PoissonParam::new(theta0)?;
    let x = x as i64;
    let raw = 2.0 * p.cdf(x).min(1.0 - p.cdf(x - 1));
    Ok(EqualTail { raw, capped: raw.min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        // 1.959963984540054 is the 0.975 quantile
        assert!((standard_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((standard_normal_cdf(1.959964) - 0.975).abs() < 1e-8);
        for &z in &[0.1, 0.9, 2.5, 6.0] {
            assert!((standard_normal_cdf(-z) - (1.0 - standard_normal_cdf(z))).abs() < 1e-15);
        }
        // deep tail keeps relative accuracy
        assert!((standard_normal_cdf(-10.0) / 7.619853024160527e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_pvalue_examples() {
        assert_eq!(normal_approx_pvalue(7, 7.0).unwrap(), 1.0);
        // choose theta0 so that x = 10 sits exactly 1.959964 standard deviations above it
        let z = 1.959963984540054f64;
        let s = (-z + (z * z + 40.0).sqrt()) / 2.0;
        assert!((normal_approx_pvalue(10, s * s).unwrap() - 0.05).abs() < 1e-12);
        let p12 = normal_approx_pvalue(12, 7.0).unwrap();
        assert!((p12 - (2.0 - 2.0 * standard_normal_cdf(5.0 / 7f64.sqrt()))).abs() < 1e-14);
        assert!((p12 - 0.0588).abs() < 5e-4);
    }

    #[test]
    fn normal_pvalue_peaks_and_decreases() {
        let theta0 = 6.0;
        let mut prev = normal_approx_pvalue(6, theta0).unwrap();
        for d in 1..15 {
            let p = normal_approx_pvalue(6 + d, theta0).unwrap();
            assert!(p < prev);
            if d <= 6 {
                assert_eq!(p, normal_approx_pvalue(6 - d, theta0).unwrap());
            }
            prev = p;
        }
    }

    #[test]
    fn equal_tail_examples() {
        let p = equal_tail_pvalue(3, 2.0).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((p.raw - 2.0 * (1.0 - 5.0 * e2)).abs() < 1e-14);
        assert!((p.raw - 0.6466).abs() < 1e-4);
        for &t in &[10.0, 25.0] {
            let p0 = equal_tail_pvalue(0, t).unwrap();
            assert!((p0.raw - 2.0 * (-t).exp()).abs() < 1e-15);
        }
        let mode = equal_tail_pvalue(7, 7.0).unwrap();
        assert!(mode.raw > 1.0);
        assert_eq!(mode.capped, 1.0);
    }
}
