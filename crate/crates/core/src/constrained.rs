//! Signal-plus-background inference with a known background mean.
//!
//! With `X = S + B`, `S ~ Pois(lambda)`, `B ~ Pois(beta)` and `beta` known, the
//! total mean `theta = lambda + beta` is constrained to `[beta, inf)`. Given
//! `x`, the auxiliary variable must then lie in `(G_{x+1}(beta), 1]`. Support
//! sets of the ranking random set (built at `theta0 = beta`) that miss this
//! range carry conflict mass; EB-SB moves all of it onto `{beta}` and keeps
//! the unconstrained plausibility everywhere above `beta`.

use crate::error::{domain, Error, Result};
use crate::ordering;
use crate::two_sided::{level_set_hull, point_plausibility, search_grid, PlausibilityInterval, ENDPOINT_TOL};

/// Known background mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    beta: f64,
}

impl ConstraintSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Self { beta })
        } else {
            Err(domain(format!("background mean must be finite and nonnegative, got {beta}")))
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `lambda = theta - beta`.
    pub fn signal(&self, theta: f64) -> f64 {
        theta - self.beta
    }
}

/// Conflict mass `bel_x([beta, inf)^c)` of the ranking random set at `beta`.
///
/// Cell `x'` of the support is `(G_{x'+1}(beta), G_{x'}(beta)]`, which lies
/// inside `(0, G_{x+1}(beta)]` exactly when `x' > x`. The largest support set
/// that misses the constraint is therefore the longest rank prefix made of
/// points above `x`.
pub fn conflict_mass(x: u64, beta: f64, epsilon: f64) -> Result<f64> {
    let spec = ConstraintSpec::new(beta)?;
    if spec.beta == 0.0 {
        return Ok(0.0);
    }
    let r = ordering::ranking(spec.beta, epsilon)?;
    let prefix = r.support().iter().take_while(|&&k| k > x).count();
    Ok(r.prefix_mass(prefix))
}

/// EB-SB plausibility of `{theta0}`.
pub fn ebsb_plausibility(x: u64, theta0: f64, beta: f64, epsilon: f64) -> Result<f64> {
    let spec = ConstraintSpec::new(beta)?;
    if !(theta0.is_finite() && theta0 > 0.0) {
        return Err(domain(format!("theta0 must be positive and finite, got {theta0}")));
    }
    if theta0 < spec.beta {
        Ok(0.0)
    } else if theta0 == spec.beta && conflict_mass(x, spec.beta, epsilon)? > 0.0 {
        Ok(1.0)
    } else {
        point_plausibility(x, theta0, epsilon)
    }
}

/// Plausibility interval for the signal `lambda`, with the conflict mass
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaInterval {
    pub beta: f64,
    pub conflict_mass: f64,
    /// Endpoints in signal units (`theta - beta`).
    pub interval: PlausibilityInterval,
}

impl LambdaInterval {
    pub fn lower(&self) -> f64 {
        self.interval.lower
    }

    pub fn upper(&self) -> f64 {
        self.interval.upper
    }

    pub fn width(&self) -> f64 {
        self.interval.width()
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.interval.contains(lambda)
    }
}

/// Level set of the EB-SB plausibility over `theta >= beta`, shifted to
/// signal units.
pub fn lambda_interval(x: u64, beta: f64, alpha: f64, epsilon: f64) -> Result<LambdaInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain(format!("background mean must be positive, got {beta}")));
    }
    let conflict = conflict_mass(x, beta, epsilon)?;
    let centre = (x as f64).max(beta);
    let hi = centre + 10.0 * (centre + 1.0).sqrt() + 10.0;
    let grid = search_grid(x, beta, hi);
    let pl = |t: f64| ebsb_plausibility(x, t, beta, epsilon);
    let hull = level_set_hull(&pl, &grid, alpha, ENDPOINT_TOL)?.ok_or(Error::EmptyLevelSet { x, alpha })?;
    let lower = if hull.open_below { 0.0 } else { (hull.lower - beta).max(0.0) };
    Ok(LambdaInterval {
        beta,
        conflict_mass: conflict,
        interval: PlausibilityInterval { x, alpha, lower, upper: hull.upper - beta, contiguous: hull.contiguous },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::gamma_cdf;
    use crate::ordering::{build_ranking, DEFAULT_EPSILON};
    use crate::two_sided::plausibility_interval;

    const EPS: f64 = DEFAULT_EPSILON;

    /// Direct containment check on the auxiliary scale: grow the nested
    /// support one cell at a time and stop as soon as a cell pokes above
    /// `G_{x+1}(beta)`.
    fn conflict_by_containment(x: u64, beta: f64) -> f64 {
        let r = build_ranking(beta, EPS).unwrap();
        let g = |a: u64| if a == 0 { 1.0 } else { gamma_cdf(a as f64, beta).unwrap() };
        let limit = g(x + 1);
        let mut mass = 0.0;
        for &k in r.support() {
            let (lo, hi) = (g(k + 1), g(k));
            if hi > limit + 1e-15 {
                break;
            }
            mass += hi - lo;
        }
        mass
    }

    #[test]
    fn conflict_matches_containment_oracle() {
        for &beta in &[0.3, 1.0, 3.0, 7.5, 15.0] {
            for x in 0..30 {
                let c = conflict_mass(x, beta, EPS).unwrap();
                let oracle = conflict_by_containment(x, beta);
                assert!((c - oracle).abs() < 1e-9, "x={x} beta={beta}: {c} vs {oracle}");
            }
        }
    }

    #[test]
    fn conflict_examples() {
        let top = build_ranking(15.0, EPS).unwrap().support()[0];
        assert_eq!(conflict_mass(top, 15.0, EPS).unwrap(), 0.0);
        assert_eq!(conflict_mass(top + 4, 15.0, EPS).unwrap(), 0.0);
        assert!(conflict_mass(0, 15.0, EPS).unwrap() > 0.0);
        for x in 0..10 {
            assert_eq!(conflict_mass(x, 1e-9, EPS).unwrap(), 0.0);
            assert_eq!(conflict_mass(x, 0.0, EPS).unwrap(), 0.0);
        }
    }

    #[test]
    fn conflict_nonincreasing_in_count() {
        for &beta in &[0.7, 3.0, 15.0] {
            let c: Vec<f64> = (0..40).map(|x| conflict_mass(x, beta, EPS).unwrap()).collect();
            assert!(c.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn ebsb_piecewise() {
        for x in 0..20 {
            assert_eq!(ebsb_plausibility(x, 7.5, 15.0, EPS).unwrap(), 0.0);
        }
        assert_eq!(ebsb_plausibility(0, 15.0, 15.0, EPS).unwrap(), 1.0);
        assert_eq!(
            ebsb_plausibility(20, 18.0, 15.0, EPS).unwrap(),
            point_plausibility(20, 18.0, EPS).unwrap()
        );
        // zero conflict at theta0 = beta falls through to the unconstrained value
        assert_eq!(ebsb_plausibility(40, 15.0, 15.0, EPS).unwrap(), point_plausibility(40, 15.0, EPS).unwrap());
    }

    #[test]
    fn zero_count_pins_lower_end() {
        let li = lambda_interval(0, 15.0, 0.1, EPS).unwrap();
        assert_eq!(li.lower(), 0.0);
        assert!(li.conflict_mass > 0.0);
    }

    #[test]
    fn widths_grow_from_the_clipped_regime() {
        let w: Vec<f64> = (0..=3).map(|x| lambda_interval(x, 3.0, 0.1, EPS).unwrap().width()).collect();
        assert!(w.windows(2).all(|p| p[1] >= p[0] - 1e-6), "{w:?}");
    }

    #[test]
    fn reduces_to_unconstrained_without_conflict() {
        let beta = 3.0;
        for x in 8..20 {
            let li = lambda_interval(x, beta, 0.1, EPS).unwrap();
            let un = plausibility_interval(x, 0.1, EPS).unwrap();
            if li.conflict_mass == 0.0 && un.lower > beta {
                assert!((li.lower() - (un.lower - beta)).abs() < 1e-5, "x={x}");
                assert!((li.upper() - (un.upper - beta)).abs() < 1e-5, "x={x}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ConstraintSpec::new(-1.0).is_err());
        assert!(lambda_interval(1, 0.0, 0.1, EPS).is_err());
        assert!(lambda_interval(1, 3.0, 1.5, EPS).is_err());
        assert!(ebsb_plausibility(1, 0.0, 3.0, EPS).is_err());
    }
}
