//! Assertions, belief/plausibility pairs, and the optimal one-sided IM.
//!
//! Under the association `F_theta(x - 1) <= 1 - U < F_theta(x)` the candidate
//! set for `(x, u)` is `[G_x^{-1}(u), G_{x+1}^{-1}(u))`. It is never built
//! explicitly: every output below reduces to Poisson CDF arithmetic.

use crate::dist::{PoissonParam};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssertionKind {
    /// `(theta0, inf)`
    Greater,
    /// `(0, theta0]`
    LessEqual,
    /// `{theta0}`
    Point,
    /// `{theta0}^c`
    PointComplement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assertion {
    kind: AssertionKind,
    theta0: PoissonParam,
}

impl Assertion {
    pub fn new(kind: AssertionKind, theta0: f64) -> Result<Self> {
        Ok(Self { kind, theta0: PoissonParam::new(theta0)? })
    }

    pub fn greater(theta0: f64) -> Result<Self> {
        Self::new(AssertionKind::Greater, theta0)
    }

    pub fn less_equal(theta0: f64) -> Result<Self> {
        Self::new(AssertionKind::LessEqual, theta0)
    }

    pub fn point(theta0: f64) -> Result<Self> {
        Self::new(AssertionKind::Point, theta0)
    }

    pub fn point_complement(theta0: f64) -> Result<Self> {
        Self::new(AssertionKind::PointComplement, theta0)
    }

    pub fn kind(&self) -> AssertionKind {
        self.kind
    }

    pub fn theta0(&self) -> f64 {
        self.theta0.get()
    }

    pub fn complement(&self) -> Self {
        let kind = match self.kind {
            AssertionKind::Greater => AssertionKind::LessEqual,
            AssertionKind::LessEqual => AssertionKind::Greater,
            AssertionKind::Point => AssertionKind::PointComplement,
            AssertionKind::PointComplement => AssertionKind::Point,
        };
        Self { kind, theta0: self.theta0 }
    }

    pub fn is_one_sided(&self) -> bool {
        matches!(self.kind, AssertionKind::Greater | AssertionKind::LessEqual)
    }
}

/// Belief and plausibility of one assertion given one observed count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefPair {
    pub belief: f64,
    pub plausibility: f64,
}

impl BeliefPair {
    pub fn new(belief: f64, plausibility: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&belief) && (0.0..=1.0).contains(&plausibility) && belief <= plausibility {
            Ok(Self { belief, plausibility })
        } else {
            Err(domain(format!("invalid belief pair ({belief}, {plausibility})")))
        }
    }
}

/// Optimal belief/plausibility for a one-sided assertion.
///
/// For `A = (theta0, inf)` this is `(F(x-1), F(x))`; for `(0, theta0]` it is
/// `(1 - F(x), 1 - F(x-1))`, with `F` the Poisson CDF at `theta0`.
pub fn one_sided(x: u64, assertion: &Assertion) -> Result<BeliefPair> {
    let p = assertion.theta0;
    let x = x as i64;
    let below = p.cdf(x - 1);
    let at = p.cdf(x);
    match assertion.kind {
        AssertionKind::Greater => Ok(BeliefPair { belief: below, plausibility: at }),
        AssertionKind::LessEqual => Ok(BeliefPair { belief: 1.0 - at, plausibility: 1.0 - below }),
        _ => Err(domain("one_sided requires a greater or less-equal assertion")),
    }
}

/// Fiducial (Dempster-Shafer) probability `P_U{u : Theta_x(u) subset A}`.
///
/// No admissible predictive random set can give more belief than this.
pub fn fiducial_bound(x: u64, assertion: &Assertion) -> f64 {
    let p = assertion.theta0;
    let xi = x as i64;
    match assertion.kind {
        AssertionKind::Greater => p.cdf(xi - 1),
        AssertionKind::LessEqual => 1.0 - p.cdf(xi),
        // Theta_x(u) is a nondegenerate interval, never inside a singleton.
        AssertionKind::Point => 0.0,
        // complement of the cell (G_{x+1}(theta0), G_x(theta0)]
        AssertionKind::PointComplement => 1.0 - p.pmf(x),
    }
}
