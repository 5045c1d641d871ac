//! Point assertions through the ranking-induced nested random set.
//!
//! `pl_x(theta0) = 1 - sum of f_theta0(x')` over the points ranked ahead of
//! `x` at `theta0`. Each `theta0` has its own ranking, so a curve in `theta0`
//! is piecewise smooth with jumps where the ranking changes; intervals are
//! reported as the hull of the level set plus a contiguity flag.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::ordering;

/// Smallest `theta` the interval search looks at.
pub const THETA_FLOOR: f64 = 1e-8;
/// Absolute tolerance on interval endpoints.
pub const ENDPOINT_TOL: f64 = 1e-6;
const GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityCurve {
    pub x: u64,
    pub theta_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Hull of `{theta : pl_x(theta) > alpha}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlausibilityInterval {
    pub x: u64,
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    /// False when some grid point strictly inside the hull has `pl <= alpha`.
    pub contiguous: bool,
}

impl PlausibilityInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

pub fn point_plausibility(x: u64, theta0: f64, epsilon: f64) -> Result<f64> {
    let r = ordering::ranking(theta0, epsilon)?;
    Ok(1.0 - r.mass_ranked_before(x))
}

/// Belief in `{theta0}^c`: the mass ranked strictly ahead of `x`.
pub fn two_sided_belief(x: u64, theta0: f64, epsilon: f64) -> Result<f64> {
    let r = ordering::ranking(theta0, epsilon)?;
    Ok(r.mass_ranked_before(x))
}

fn check_grid(theta_grid: &[f64]) -> Result<()> {
    if theta_grid.is_empty() {
        return Err(domain("theta grid is empty"));
    }
    if theta_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(domain("theta grid must be positive and finite"));
    }
    if theta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("theta grid must be strictly increasing"));
    }
    Ok(())
}

pub fn plausibility_curve(x: u64, theta_grid: &[f64], epsilon: f64) -> Result<PlausibilityCurve> {
    check_grid(theta_grid)?;
    let values = theta_grid
        .par_iter()
        .map(|&t| point_plausibility(x, t, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlausibilityCurve { x, theta_grid: theta_grid.to_vec(), values })
}

/// Search bracket `[max(1e-8, x - 10 sqrt(x+1)), x + 10 sqrt(x+1) + 10]`.
pub fn search_bracket(x: u64) -> (f64, f64) {
    let xf = x as f64;
    let spread = 10.0 * (xf + 1.0).sqrt();
    ((xf - spread).max(THETA_FLOOR), xf + spread + 10.0)
}

/// Initial search grid: geometric below one, linear above, always containing
/// `x` itself when it lies inside the bracket.
pub fn search_grid(x: u64, lo: f64, hi: f64) -> Vec<f64> {
    let mut grid = Vec::with_capacity(GRID_POINTS + 1);
    if lo < 1.0 && hi > 1.0 {
        let n_geo = GRID_POINTS / 4;
        let ratio = (1.0 / lo).ln() / n_geo as f64;
        grid.extend((0..n_geo).map(|i| lo * (ratio * i as f64).exp()));
        linear_fill(&mut grid, 1.0, hi, GRID_POINTS - n_geo);
    } else {
        linear_fill(&mut grid, lo, hi, GRID_POINTS);
    }
    let xf = x as f64;
    if xf > lo && xf < hi {
        grid.push(xf);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn linear_fill(grid: &mut Vec<f64>, lo: f64, hi: f64, n: usize) {
    let step = (hi - lo) / (n - 1) as f64;
    grid.extend((0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }));
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hull {
    pub lower: f64,
    pub upper: f64,
    pub contiguous: bool,
    /// The first grid point already lies in the level set.
    pub open_below: bool,
}

/// Hull of `{theta : f(theta) > alpha}` over `grid`, with both boundaries
/// refined to `tol`. `None` when no grid point is in the level set.
pub(crate) fn level_set_hull<F>(f: &F, grid: &[f64], alpha: f64, tol: f64) -> Result<Option<Hull>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let values = grid.par_iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let Some(first) = values.iter().position(|&v| v > alpha) else {
        return Ok(None);
    };
    let last = values.iter().rposition(|&v| v > alpha).expect("nonempty level set");
    let contiguous = values[first..=last].iter().all(|&v| v > alpha);
    let lower = if first == 0 {
        grid[0]
    } else {
        refine_boundary(f, grid[first - 1], grid[first], alpha, tol, true)?
    };
    let upper = if last == grid.len() - 1 {
        grid[last]
    } else {
        refine_boundary(f, grid[last], grid[last + 1], alpha, tol, false)?
    };
    Ok(Some(Hull { lower, upper, contiguous, open_below: first == 0 }))
}

/// Locates the level-set boundary inside `[a, b]`.
///
/// `rising`: `f(a) <= alpha < f(b)` and the leftmost crossing is wanted;
/// otherwise `f(a) > alpha >= f(b)` and the rightmost crossing is wanted.
/// The bracket is sampled at its quarter points; while those samples are not
/// monotone the bracket shrinks to the outermost crossing sub-bracket, after
/// which plain bisection finishes the job.
fn refine_boundary<F>(f: &F, mut a: f64, mut b: f64, alpha: f64, tol: f64, rising: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let inside = |v: f64| v > alpha;
    let mut monotone = false;
    while b - a > tol && !monotone {
        let pts: Vec<f64> = (0..=4).map(|k| a + (b - a) * k as f64 / 4.0).collect();
        let mut vals = [0.0; 5];
        for k in 1..4 {
            vals[k] = f(pts[k])?;
        }
        let flags: Vec<bool> =
            (0..=4).map(|k| if k == 0 { !rising } else if k == 4 { rising } else { inside(vals[k]) }).collect();
        monotone = flags.windows(2).filter(|w| w[0] != w[1]).count() == 1;
        if rising {
            let k = (1..=4).find(|&k| flags[k]).expect("b is inside");
            a = pts[k - 1];
            b = pts[k];
        } else {
            let k = (0..4).rev().find(|&k| flags[k]).expect("a is inside");
            a = pts[k];
            b = pts[k + 1];
        }
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if inside(f(mid)?) == rising {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `Pi_x(alpha) = {theta : pl_x(theta) > alpha}`, reported as its hull.
pub fn plausibility_interval(x: u64, alpha: f64, epsilon: f64) -> Result<PlausibilityInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let (lo, hi) = search_bracket(x);
    let grid = search_grid(x, lo, hi);
    let pl = |t: f64| point_plausibility(x, t, epsilon);
    let hull = level_set_hull(&pl, &grid, alpha, ENDPOINT_TOL)?.ok_or(Error::EmptyLevelSet { x, alpha })?;
    // pl_x(theta) -> 1 as theta -> 0 when the floor is already inside.
    let lower = if hull.open_below && lo == THETA_FLOOR { 0.0 } else { hull.lower };
    Ok(PlausibilityInterval { x, alpha, lower, upper: hull.upper, contiguous: hull.contiguous })
}
