//! Recursive score-balanced ordering of the Poisson sample space.
//!
//! For a fixed `theta0` the sample space is truncated to `{0, ..., N}` with
//! `F_theta0(N) >= 1 - eps`, split into points with nonnegative natural-
//! parameter score `x - theta0` and points with negative score, and then
//! ranked greedily. At each step the two candidates are the smallest
//! remaining nonnegative-score point and the largest remaining
//! negative-score point. The candidate whose inclusion keeps the
//! normalized cumulative score `tau` closest to zero wins, provided the
//! cumulative `nu = sum V f` stays nonpositive; otherwise the other candidate
//! is taken if its `nu` is nonpositive, and the construction stops if neither
//! qualifies.
//!
//! The ranking defines nested supports `S_t = union of cells of the first t
//! points`, and the plausibility of `{theta0}` at `x` is one minus the mass of
//! all points ranked strictly ahead of `x`.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::{Arc, OnceLock, RwLock};

use crate::dist::{poisson_pmf_table, poisson_quantile, PoissonParam};
use crate::error::{domain, Error, Result, StoppedOrdering};

pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Natural-parameter score `t = x - theta0` and curvature term
/// `v = t^2 - theta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair {
    pub t: f64,
    pub v: f64,
}

impl ScorePair {
    pub fn new(x: u64, theta0: f64) -> Self {
        let t = x as f64 - theta0;
        Self { t, v: t * t - theta0 }
    }
}

/// Output of the recursive ordering at one `theta0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    theta0: f64,
    epsilon: f64,
    /// Sample points in rank order; rank `r` is `support[r - 1]`.
    support: Vec<u64>,
    /// 1-based rank of each `x` in `0..=truncation_bound`.
    rank_of: Vec<usize>,
    /// `f_theta0(x)` for `x` in `0..=truncation_bound`.
    masses: Vec<f64>,
    /// `prefix_mass[r]` is the mass of the first `r` ranked points.
    prefix_mass: Vec<f64>,
}

impl Ranking {
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Largest point of the truncated sample space.
    pub fn truncation_bound(&self) -> u64 {
        (self.rank_of.len() - 1) as u64
    }

    pub fn contains(&self, x: u64) -> bool {
        x <= self.truncation_bound()
    }

    /// Rank of `x`; points beyond the truncation share rank `len() + 1`.
    pub fn rank(&self, x: u64) -> usize {
        self.rank_of.get(x as usize).copied().unwrap_or(self.support.len() + 1)
    }

    /// `f_theta0(x)` for points inside the truncation.
    pub fn mass(&self, x: u64) -> Option<f64> {
        self.masses.get(x as usize).copied()
    }

    /// Mass of the points ranked strictly ahead of `x`.
    pub fn mass_ranked_before(&self, x: u64) -> f64 {
        self.prefix_mass[self.rank(x) - 1]
    }

    /// Mass of the first `r` ranked points (`0 <= r <= len()`).
    pub fn prefix_mass(&self, r: usize) -> f64 {
        self.prefix_mass[r]
    }

    pub fn scores(&self, x: u64) -> ScorePair {
        ScorePair::new(x, self.theta0)
    }
}

/// Cumulative `T(r) = sum_{E_r} (x - theta0) f` and `V(r) = sum_{E_r} V f`,
/// indexed by `r - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

fn check_theta_eps(theta0: f64, epsilon: f64) -> Result<()> {
    PoissonParam::new(theta0)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("truncation tolerance must lie in (0,1), got {epsilon}")));
    }
    Ok(())
}

/// Smallest block `0..=N` carrying at least `1 - eps` of the mass at `theta0`.
pub fn truncate_support(theta0: f64, epsilon: f64) -> Result<RangeInclusive<u64>> {
    check_theta_eps(theta0, epsilon)?;
    let p = PoissonParam::new(theta0)?;
    let target = 1.0 - epsilon;
    let mut n = poisson_quantile(theta0, target)?;
    while n > 0 && p.cdf(n as i64 - 1) >= target {
        n -= 1;
    }
    while p.cdf(n as i64) < target {
        n += 1;
    }
    Ok(0..=n)
}

/// Runs the recursive ordering at `theta0`.
pub fn build_ranking(theta0: f64, epsilon: f64) -> Result<Ranking> {
    let bound = *truncate_support(theta0, epsilon)?.end();
    let masses = poisson_pmf_table(theta0, bound)?;
    let n = masses.len();

    // First point with nonnegative score; everything below it is negative.
    let split = (0..n).find(|&x| x as f64 - theta0 >= 0.0).unwrap_or(n);
    let mut next_plus = split; // ascending through split..n
    let mut next_minus = split; // descending; candidate is next_minus - 1

    let mut support = Vec::with_capacity(n);
    let mut rank_of = vec![0usize; n];
    let mut prefix_mass = Vec::with_capacity(n + 1);
    prefix_mass.push(0.0);

    // Running sums over E_{r-1}: mass, sum (x-theta0) f, sum V f.
    let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);

    while support.len() < n {
        let plus_left = next_plus < n;
        let minus_left = next_minus > 0;
        let take_plus = if !plus_left {
            false
        } else if !minus_left {
            true
        } else {
            let up = next_plus;
            let down = next_minus - 1;
            let (sp, sm) = (ScorePair::new(up as u64, theta0), ScorePair::new(down as u64, theta0));
            let (fp, fm) = (masses[up], masses[down]);
            let tau_plus = (s1 + sp.t * fp) / (s0 + fp);
            let tau_minus = (s1 + sm.t * fm) / (s0 + fm);
            let nu_plus = s2 + sp.v * fp;
            let nu_minus = s2 + sm.v * fm;
            if tau_plus.abs() <= tau_minus.abs() && nu_plus <= 0.0 {
                true
            } else if nu_minus <= 0.0 {
                false
            } else {
                return Err(Error::OrderingStopped(Box::new(StoppedOrdering {
                    theta0,
                    epsilon,
                    ranked: support,
                    upper_candidate: (up as u64, nu_plus),
                    lower_candidate: (down as u64, nu_minus),
                })));
            }
        };
        let x = if take_plus {
            next_plus += 1;
            next_plus - 1
        } else {
            next_minus -= 1;
            next_minus
        };
        let sc = ScorePair::new(x as u64, theta0);
        let f = masses[x];
        s0 += f;
        s1 += sc.t * f;
        s2 += sc.v * f;
        support.push(x as u64);
        rank_of[x] = support.len();
        prefix_mass.push(s0);
    }

    Ok(Ranking { theta0, epsilon, support, rank_of, masses, prefix_mass })
}

/// Cumulative score and curvature sums along the ranking.
pub fn diagnostics(ranking: &Ranking) -> Diagnostics {
    let mut t_acc = 0.0;
    let mut v_acc = 0.0;
    let mut t = Vec::with_capacity(ranking.len());
    let mut v = Vec::with_capacity(ranking.len());
    for &x in &ranking.support {
        let sc = ranking.scores(x);
        let f = ranking.masses[x as usize];
        t_acc += sc.t * f;
        v_acc += sc.v * f;
        t.push(t_acc);
        v.push(v_acc);
    }
    Diagnostics { t, v }
}

/// `psi_x(theta) = P_theta{points ranked ahead of x}` on a grid of `theta`.
pub fn psi_curve(ranking: &Ranking, x: u64, theta_grid: &[f64]) -> Result<Vec<f64>> {
    if !ranking.contains(x) {
        return Err(Error::NotInSupport { x, bound: ranking.truncation_bound() });
    }
    let ahead = &ranking.support[..ranking.rank(x) - 1];
    theta_grid
        .iter()
        .map(|&theta| {
            let table = poisson_pmf_table(theta, ranking.truncation_bound())?;
            Ok(ahead.iter().map(|&k| table[k as usize]).sum())
        })
        .collect()
}

/// Process-wide memo of rankings keyed by the bit patterns of
/// `(theta0, epsilon)`. Concurrent inserts of the same key store equal values.
#[derive(Debug, Default)]
pub struct RankingCache {
    map: RwLock<HashMap<(u64, u64), Arc<Ranking>>>,
    capacity: usize,
}

impl RankingCache {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { map: RwLock::default(), capacity }
    }

    pub fn global() -> &'static RankingCache {
        static CACHE: OnceLock<RankingCache> = OnceLock::new();
        CACHE.get_or_init(|| RankingCache::with_capacity(250_000))
    }

    pub fn get(&self, theta0: f64, epsilon: f64) -> Result<Arc<Ranking>> {
        let key = (theta0.to_bits(), epsilon.to_bits());
        if let Some(r) = self.map.read().expect("ranking cache poisoned").get(&key) {
            return Ok(Arc::clone(r));
        }
        let ranking = Arc::new(build_ranking(theta0, epsilon)?);
        let mut map = self.map.write().expect("ranking cache poisoned");
        if self.capacity > 0 && map.len() >= self.capacity {
            map.clear();
        }
        map.insert(key, Arc::clone(&ranking));
        Ok(ranking)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("ranking cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Cached ranking from the global cache.
pub fn ranking(theta0: f64, epsilon: f64) -> Result<Arc<Ranking>> {
    RankingCache::global().get(theta0, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{poisson_cdf, poisson_pmf};

    #[test]
    fn truncation_examples() {
        // F_5(4) ~ 0.4405 < 0.5 <= F_5(5) ~ 0.6160
        assert_eq!(truncate_support(5.0, 0.5).unwrap(), 0..=5);
        // F_2(0) = e^-2 ~ 0.135 >= 1 - 0.9
        assert_eq!(truncate_support(2.0, 0.9).unwrap(), 0..=0);
        let r = truncate_support(7.0, 1e-10).unwrap();
        let n = *r.end();
        let total: f64 = (0..=n).map(|x| poisson_pmf(x, 7.0).unwrap()).sum();
        assert!(total >= 1.0 - 1e-10);
        assert!(poisson_cdf(n as i64 - 1, 7.0).unwrap() < 1.0 - 1e-10);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(build_ranking(5.0, 0.0).is_err());
        assert!(build_ranking(5.0, 1.0).is_err());
        assert!(build_ranking(-1.0, 0.1).is_err());
    }

    #[test]
    fn first_rank_examples() {
        assert_eq!(build_ranking(7.0, DEFAULT_EPSILON).unwrap().support()[0], 7);
        assert_eq!(build_ranking(0.5, DEFAULT_EPSILON).unwrap().support()[0], 1);
        for m in 1..=25u64 {
            let r = build_ranking(m as f64, DEFAULT_EPSILON).unwrap();
            assert_eq!(r.support()[0], m);
            assert_eq!(r.rank(m), 1);
        }
    }

    #[test]
    fn ranks_are_a_permutation() {
        for &theta0 in &[0.05, 0.5, 1.0, 2.7, 7.0, 19.3, 60.0] {
            let r = build_ranking(theta0, 1e-8).unwrap();
            let mut seen = r.support().to_vec();
            seen.sort_unstable();
            let expect: Vec<u64> = (0..=r.truncation_bound()).collect();
            assert_eq!(seen, expect);
            for (i, &x) in r.support().iter().enumerate() {
                assert_eq!(r.rank(x), i + 1);
            }
            assert_eq!(r.rank(r.truncation_bound() + 1), r.len() + 1);
            assert_eq!(r.rank(u64::MAX), r.len() + 1);
        }
    }

    #[test]
    fn sides_are_taken_in_order() {
        for &theta0 in &[0.5, 3.7, 7.0, 12.25] {
            let r = build_ranking(theta0, 1e-10).unwrap();
            let plus: Vec<u64> = r.support().iter().copied().filter(|&x| x as f64 >= theta0).collect();
            let minus: Vec<u64> = r.support().iter().copied().filter(|&x| (x as f64) < theta0).collect();
            assert!(plus.windows(2).all(|w| w[0] < w[1]));
            assert!(minus.windows(2).all(|w| w[0] > w[1]));
        }
    }

    /// `sum_{x > N} g(x) f(x)`, summed independently of the ranking.
    fn tail_sum(theta0: f64, n: u64, g: impl Fn(f64) -> f64) -> f64 {
        (n + 1..n + 400).map(|x| g(x as f64 - theta0) * poisson_pmf(x, theta0).unwrap()).sum()
    }

    #[test]
    fn diagnostics_end_at_truncation_slack() {
        for &theta0 in &[0.5, 5.0, 10.0] {
            let r = build_ranking(theta0, 1e-10).unwrap();
            let d = diagnostics(&r);
            assert_eq!(d.t.len(), r.len());
            let n = r.truncation_bound();
            // full sums vanish, so the truncated sums are minus the tails
            let t_slack = tail_sum(theta0, n, |t| t);
            let v_slack = tail_sum(theta0, n, |t| t * t - theta0);
            assert!((d.t.last().unwrap() + t_slack).abs() < 1e-13, "theta0={theta0}");
            assert!((d.v.last().unwrap() + v_slack).abs() < 1e-12, "theta0={theta0}");
            assert!(d.t.last().unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn curvature_negative_before_the_end_at_five() {
        let r = build_ranking(5.0, 1e-10).unwrap();
        let d = diagnostics(&r);
        for (i, v) in d.v[..d.v.len() - 1].iter().enumerate() {
            assert!(*v < 0.0, "V({}) = {v}", i + 1);
        }
    }

    #[test]
    fn score_pair_identity() {
        let s = ScorePair::new(9, 6.5);
        assert_eq!(s.t, 2.5);
        assert_eq!(s.v, s.t * s.t - 6.5);
    }

    #[test]
    fn psi_examples() {
        let r = build_ranking(7.0, 1e-10).unwrap();
        let grid: Vec<f64> = (1..50).map(|i| i as f64 * 0.3).collect();
        assert!(psi_curve(&r, 7, &grid).unwrap().iter().all(|&v| v == 0.0));
        let second = r.support()[1];
        let psi = psi_curve(&r, second, &grid).unwrap();
        for (v, &t) in psi.iter().zip(&grid) {
            assert!((v - poisson_pmf(7, t).unwrap()).abs() < 1e-14);
        }
        assert!(matches!(
            psi_curve(&r, r.truncation_bound() + 1, &grid),
            Err(Error::NotInSupport { .. })
        ));
    }

    #[test]
    fn cache_returns_equal_rankings() {
        let cache = RankingCache::with_capacity(2);
        let a = cache.get(4.4, 1e-9).unwrap();
        let b = cache.get(4.4, 1e-9).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, build_ranking(4.4, 1e-9).unwrap());
        cache.get(1.0, 1e-9).unwrap();
        cache.get(2.0, 1e-9).unwrap();
        assert!(cache.len() <= 2);
    }

    #[test]
    fn cache_is_safe_under_concurrency() {
        let cache = RankingCache::with_capacity(0);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for i in 1..40 {
                        let r = cache.get(i as f64 * 0.25, 1e-9).unwrap();
                        assert_eq!(r.theta0(), i as f64 * 0.25);
                    }
                });
            }
        });
        assert_eq!(cache.len(), 39);
    }
}
