//! Poisson and gamma distribution numerics.
//!
//! Everything here works with the Poisson mean `theta` (events per window)
//! and the unit-rate gamma distribution function `G_a`, linked by
//! `F_theta(x) = 1 - G_{x+1}(theta)`.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// A validated Poisson mean.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PoissonParam(f64);

impl PoissonParam {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta > 0.0 {
            Ok(Self(theta))
        } else {
            Err(domain(format!("Poisson mean must be positive and finite, got {theta}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn pmf(self, x: u64) -> f64 {
        pmf_unchecked(x, self.0)
    }

    pub fn cdf(self, x: i64) -> f64 {
        cdf_unchecked(x, self.0)
    }
}

/// A validated gamma shape (rate fixed at one).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaShape(f64);

impl GammaShape {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(Self(a))
        } else {
            Err(domain(format!("gamma shape must be positive and finite, got {a}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

fn ln_pmf(x: u64, theta: f64) -> f64 {
    let xf = x as f64;
    if x == 0 {
        return -theta;
    }
    xf * theta.ln() - theta - libm::lgamma(xf + 1.0)
}

fn pmf_unchecked(x: u64, theta: f64) -> f64 {
    ln_pmf(x, theta).exp()
}

fn cdf_unchecked(x: i64, theta: f64) -> f64 {
    if x < 0 {
        return 0.0;
    }
    let x = x as u64;
    if (x as f64) < theta {
        // Lower tail, summed downward from x: terms shrink geometrically.
        let mut term = pmf_unchecked(x, theta);
        let mut sum = term;
        let mut k = x;
        while k > 0 {
            term *= k as f64 / theta;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            k -= 1;
        }
        sum
    } else {
        1.0 - upper_tail(x, theta)
    }
}

/// `sum_{k > x} f_theta(k)`.
fn upper_tail(x: u64, theta: f64) -> f64 {
    let mut k = x + 1;
    let mut term = pmf_unchecked(k, theta);
    let mut sum = term;
    loop {
        k += 1;
        term *= theta / k as f64;
        sum += term;
        if term <= sum * 1e-17 || term == 0.0 {
            return sum;
        }
    }
}

/// Poisson probability mass `e^{-theta} theta^x / x!`, evaluated in log space.
pub fn poisson_pmf(x: u64, theta: f64) -> Result<f64> {
    Ok(PoissonParam::new(theta)?.pmf(x))
}

/// Poisson distribution function `F_theta(x)`; zero for negative `x`.
pub fn poisson_cdf(x: i64, theta: f64) -> Result<f64> {
    Ok(PoissonParam::new(theta)?.cdf(x))
}

/// Probability masses `f_theta(0..=n)`.
///
/// Starts from the mode in log space and fills outward with the ratio
/// recurrence, so large `theta` neither overflows nor underflows at the mode.
pub fn poisson_pmf_table(theta: f64, n: u64) -> Result<Vec<f64>> {
    let p = PoissonParam::new(theta)?;
    let n = n as usize;
    let mut out = vec![0.0; n + 1];
    let mode = (theta.floor() as usize).min(n);
    out[mode] = p.pmf(mode as u64);
    for k in mode + 1..=n {
        out[k] = out[k - 1] * theta / k as f64;
    }
    for k in (0..mode).rev() {
        out[k] = out[k + 1] * (k + 1) as f64 / theta;
    }
    Ok(out)
}

/// Regularized lower incomplete gamma `P(a, theta)`, the unit-rate gamma
/// distribution function `G_a(theta)`.
pub fn gamma_cdf(a: f64, theta: f64) -> Result<f64> {
    Ok(gamma_pair(a, theta)?.0)
}

/// `1 - G_a(theta)` without cancellation.
pub fn gamma_sf(a: f64, theta: f64) -> Result<f64> {
    Ok(gamma_pair(a, theta)?.1)
}

/// Returns `(P(a, theta), Q(a, theta))`.
///
/// Series for `theta < a + 1`, modified Lentz continued fraction otherwise.
fn gamma_pair(a: f64, theta: f64) -> Result<(f64, f64)> {
    let a = GammaShape::new(a)?.get();
    if !(theta >= 0.0) || theta.is_infinite() {
        return Err(domain(format!("gamma argument must be finite and nonnegative, got {theta}")));
    }
    if theta == 0.0 {
        return Ok((0.0, 1.0));
    }
    let ln_prefactor = a * theta.ln() - theta - libm::lgamma(a);
    if theta < a + 1.0 {
        let p = (ln_prefactor + series_ln(a, theta)?).exp();
        Ok((p, 1.0 - p))
    } else {
        let q = (ln_prefactor - continued_fraction(a, theta)?.ln()).exp();
        Ok((1.0 - q, q))
    }
}

/// `ln sum_{n>=0} theta^n / (a (a+1) ... (a+n))`.
fn series_ln(a: f64, theta: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= theta / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON * 0.25 {
            return Ok(sum.ln());
        }
    }
    Err(Error::NoConvergence("incomplete gamma series"))
}

/// Denominator of the continued fraction `Q = prefactor / cf`.
fn continued_fraction(a: f64, theta: f64) -> Result<f64> {
    let mut b = theta + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON * 0.25 {
            return Ok(1.0 / h);
        }
    }
    Err(Error::NoConvergence("incomplete gamma continued fraction"))
}

/// Draws one uniform `U` on the open unit interval.
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Smallest `x` with `F_theta(x) >= target`, for `target` in (0, 1).
///
/// With `target = 1 - U` this is exactly the association
/// `F_theta(x - 1) <= 1 - U < F_theta(x)` read as a sampling recipe.
pub fn poisson_quantile(theta: f64, target: f64) -> Result<u64> {
    let p = PoissonParam::new(theta)?;
    if !(target > 0.0 && target < 1.0) {
        return Err(domain(format!("quantile target must lie in (0,1), got {target}")));
    }
    let theta = p.get();
    if theta < 700.0 {
        let mut x = 0u64;
        let mut term = (-theta).exp();
        let mut cum = term;
        while cum < target {
            x += 1;
            term *= theta / x as f64;
            if term == 0.0 && x as f64 > theta {
                break;
            }
            cum += term;
        }
        return Ok(x);
    }
    // Large means: start at the mode and walk using the exact CDF.
    let mut x = theta.floor() as u64;
    if p.cdf(x as i64) >= target {
        while x > 0 && p.cdf(x as i64 - 1) >= target {
            x -= 1;
        }
    } else {
        while p.cdf(x as i64) < target {
            x += 1;
        }
    }
    Ok(x)
}

/// One Poisson draw by inversion of the distribution function.
pub fn poisson_sample<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<u64> {
    let u = open_uniform(rng);
    poisson_quantile(theta, 1.0 - u)
}
