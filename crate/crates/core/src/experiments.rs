//! Monte Carlo harness: plausibility CDFs, interval coverage, interval widths.
//!
//! Every simulated count comes from CDF inversion of one counter-addressed
//! uniform (see [`crate::rng`]), and statistics are pure counts over those
//! draws, so a report depends only on its configuration and seed.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{equal_tail_pvalue, normal_approx_pvalue};
use crate::constrained::{lambda_interval, LambdaInterval};
use crate::csv::{write_table, Cell};
use crate::dist::{poisson_pmf_table, PoissonParam};
use crate::error::{Error, Result};
use crate::ordering::{self, Ranking, DEFAULT_EPSILON};
use crate::rng::{with_workers, Substream};
use crate::two_sided::{plausibility_interval, PlausibilityInterval};

/// Sample size used for the published-style runs.
pub const FULL_SAMPLES: u64 = 100_000;
/// Smaller sample size for routine runs; pair it with [`CI_TOLERANCE`].
pub const CI_SAMPLES: u64 = 20_000;
pub const CI_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Im,
    Normal,
    EqualTail,
    Ebsb,
    Unconstrained,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Im => "im",
            Method::Normal => "normal",
            Method::EqualTail => "equal-tail",
            Method::Ebsb => "ebsb",
            Method::Unconstrained => "unconstrained",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "im" => Method::Im,
            "normal" => Method::Normal,
            "equal-tail" => Method::EqualTail,
            "ebsb" => Method::Ebsb,
            "unconstrained" => Method::Unconstrained,
            other => return Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        })
    }
}

/// `0.01, 0.02, ..., 0.99`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub theta0: f64,
    pub theta_true_list: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    pub epsilon: f64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(theta0: f64, theta_true_list: Vec<f64>, n_samples: u64, seed: u64) -> Self {
        Self {
            theta0,
            theta_true_list,
            n_samples,
            seed,
            alpha_grid: default_alpha_grid(),
            epsilon: DEFAULT_EPSILON,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PoissonParam::new(self.theta0)?;
        for &t in &self.theta_true_list {
            PoissonParam::new(t)?;
        }
        check_samples(self.n_samples)?;
        if self.alpha_grid.is_empty()
            || self.alpha_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0))
            || self.alpha_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidConfig("alpha grid must be strictly increasing inside (0,1)".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        Ok(())
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
        vec![
            ("theta0".into(), self.theta0.to_string()),
            ("theta_true".into(), list(&self.theta_true_list)),
            ("n".into(), self.n_samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("alpha_points".into(), self.alpha_grid.len().to_string()),
            ("eps".into(), self.epsilon.to_string()),
        ]
    }
}

fn check_samples(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidConfig("number of samples must be at least one".into()))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcdfRow {
    pub method: Method,
    pub theta_true: f64,
    pub alpha: f64,
    pub ecdf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub method: Method,
    /// `lambda` for EB-SB rows, `theta` for unconstrained rows.
    pub parameter: f64,
    pub coverage: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthRow {
    pub x: u64,
    pub method: Method,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimTable {
    PlCdf(Vec<EcdfRow>),
    Coverage(Vec<CoverageRow>),
    Width(Vec<WidthRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub table: SimTable,
    pub metadata: Vec<(String, String)>,
}

impl SimReport {
    pub fn columns(&self) -> Vec<&'static str> {
        match &self.table {
            SimTable::PlCdf(_) => vec!["method", "theta_true", "alpha", "ecdf"],
            SimTable::Coverage(rows) => {
                let key = if rows.iter().all(|r| r.method == Method::Ebsb) { "lambda" } else { "theta" };
                vec![key, "coverage", "n"]
            }
            SimTable::Width(_) => vec!["x", "method", "lower", "upper", "width"],
        }
    }

    pub fn rows(&self) -> Vec<Vec<Cell>> {
        match &self.table {
            SimTable::PlCdf(rows) => rows
                .iter()
                .map(|r| vec![r.method.as_str().into(), r.theta_true.into(), r.alpha.into(), r.ecdf.into()])
                .collect(),
            SimTable::Coverage(rows) => {
                rows.iter().map(|r| vec![r.parameter.into(), r.coverage.into(), r.n.into()]).collect()
            }
            SimTable::Width(rows) => rows
                .iter()
                .map(|r| vec![r.x.into(), r.method.as_str().into(), r.lower.into(), r.upper.into(), r.width.into()])
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write_table(out, &self.columns(), &self.rows())
    }

    /// Metadata as `# key=value` lines.
    pub fn write_metadata<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        Ok(())
    }

    /// Empirical CDF values of one method at one true mean, in alpha order.
    pub fn ecdf(&self, method: Method, theta_true: f64) -> Vec<f64> {
        match &self.table {
            SimTable::PlCdf(rows) => rows
                .iter()
                .filter(|r| r.method == method && r.theta_true == theta_true)
                .map(|r| r.ecdf)
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Per-count plausibility under each method at a fixed `theta0`.
struct PlTable {
    ranking: std::sync::Arc<Ranking>,
    theta0: f64,
}

impl PlTable {
    fn value(&self, method: Method, x: u64) -> Result<f64> {
        match method {
            Method::Im => Ok(1.0 - self.ranking.mass_ranked_before(x)),
            Method::Normal => normal_approx_pvalue(x, self.theta0),
            // raw formula: rejection decisions use it as written
            Method::EqualTail => Ok(equal_tail_pvalue(x, self.theta0)?.raw),
            other => Err(Error::InvalidConfig(format!("{other} is not a point-null method"))),
        }
    }
}

pub const PL_CDF_METHODS: [Method; 3] = [Method::Im, Method::Normal, Method::EqualTail];

fn ecdf_from_histogram(values: &[f64], hist: &[u64], n: u64, alpha_grid: &[f64]) -> Vec<f64> {
    alpha_grid
        .iter()
        .map(|&a| {
            let hits: u64 = values.iter().zip(hist).filter(|(v, _)| **v <= a).map(|(_, c)| *c).sum();
            hits as f64 / n as f64
        })
        .collect()
}

/// Empirical CDF of `pl_X(theta0)` for `X ~ Pois(theta)`, for the IM and both
/// baselines, at every `theta` in the configuration.
pub fn pl_cdf_simulation(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    with_workers(config.workers, || {
        let table = PlTable { ranking: ordering::ranking(config.theta0, config.epsilon)?, theta0: config.theta0 };
        let mut rows = Vec::new();
        for (j, &theta) in config.theta_true_list.iter().enumerate() {
            let hist = Substream::new(config.seed, j as u64).poisson_histogram(theta, config.n_samples)?;
            for method in PL_CDF_METHODS {
                let values = (0..hist.len() as u64).map(|x| table.value(method, x)).collect::<Result<Vec<_>>>()?;
                let ecdf = ecdf_from_histogram(&values, &hist, config.n_samples, &config.alpha_grid);
                rows.extend(config.alpha_grid.iter().zip(ecdf).map(|(&alpha, ecdf)| EcdfRow {
                    method,
                    theta_true: theta,
                    alpha,
                    ecdf,
                }));
            }
        }
        Ok(SimReport { table: SimTable::PlCdf(rows), metadata: config.metadata() })
    })
}

/// Exact `P_theta{pl_X(theta0) <= alpha}` for one method, summing the Poisson
/// masses over counts until the remaining tail is below `1e-15`.
pub fn exact_pl_cdf(method: Method, theta0: f64, theta: f64, alpha_grid: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    let table = PlTable { ranking: ordering::ranking(theta0, epsilon)?, theta0 };
    let p = PoissonParam::new(theta)?;
    let mut top = (theta + 20.0 * theta.sqrt() + 20.0) as u64;
    while 1.0 - p.cdf(top as i64) > 1e-15 {
        top += 10;
    }
    let masses = poisson_pmf_table(theta, top)?;
    let values = (0..=top).map(|x| table.value(method, x)).collect::<Result<Vec<_>>>()?;
    Ok(alpha_grid
        .iter()
        .map(|&a| values.iter().zip(&masses).filter(|(v, _)| **v <= a).map(|(_, m)| m).sum())
        .collect())
}

/// One method's verdict in [`validity_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityEntry {
    pub method: Method,
    /// Largest `ecdf(alpha) - alpha` over the grid.
    pub max_excess: f64,
    pub worst_alpha: f64,
    /// Largest excess measured in units of `sqrt(alpha (1 - alpha) / n)`.
    pub max_z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub theta0: f64,
    pub n: u64,
    pub seed: u64,
    pub entries: Vec<ValidityEntry>,
}

impl ValidityReport {
    pub fn entry(&self, method: Method) -> Option<&ValidityEntry> {
        self.entries.iter().find(|e| e.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let rows: Vec<Vec<Cell>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.method.as_str().into(),
                    self.theta0.into(),
                    self.n.into(),
                    e.max_excess.into(),
                    e.worst_alpha.into(),
                    e.max_z.into(),
                    e.pass.into(),
                ]
            })
            .collect();
        write_table(out, &["method", "theta0", "n", "max_excess", "worst_alpha", "max_z", "pass"], &rows)
    }
}

/// Number of standard errors an empirical CDF may sit above the diagonal.
pub const VALIDITY_Z: f64 = 3.0;

/// Simulates at the null (`theta = theta0`) and flags every method whose
/// empirical CDF exceeds `alpha` by more than `3 sqrt(alpha (1 - alpha) / n)`
/// at some grid point.
pub fn validity_report(config: &SimConfig) -> Result<ValidityReport> {
    let mut at_null = config.clone();
    at_null.theta_true_list = vec![config.theta0];
    let report = pl_cdf_simulation(&at_null)?;
    let n = config.n_samples as f64;
    let entries = PL_CDF_METHODS
        .iter()
        .map(|&method| {
            let ecdf = report.ecdf(method, config.theta0);
            let mut entry =
                ValidityEntry { method, max_excess: f64::NEG_INFINITY, worst_alpha: 0.0, max_z: f64::NEG_INFINITY, pass: true };
            for (&a, &c) in config.alpha_grid.iter().zip(&ecdf) {
                let excess = c - a;
                let se = (a * (1.0 - a) / n).sqrt();
                if excess > entry.max_excess {
                    entry.max_excess = excess;
                    entry.worst_alpha = a;
                }
                entry.max_z = entry.max_z.max(excess / se);
                if excess > VALIDITY_Z * se {
                    entry.pass = false;
                }
            }
            entry
        })
        .collect();
    Ok(ValidityReport { theta0: config.theta0, n: config.n_samples, seed: config.seed, entries })
}

fn distinct_counts(hists: &[Vec<u64>]) -> Vec<u64> {
    let top = hists.iter().map(Vec::len).max().unwrap_or(0);
    (0..top as u64).filter(|&x| hists.iter().any(|h| h.get(x as usize).is_some_and(|&c| c > 0))).collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// Coverage of the EB-SB `lambda` interval: for each `lambda` draw `n`
/// counts from `Pois(lambda + beta)` and record how often the interval
/// computed from the count contains `lambda`.
pub fn coverage_simulation(
    beta: f64,
    lambda_grid: &[f64],
    alpha: f64,
    n: u64,
    seed: u64,
    epsilon: f64,
    workers: Option<usize>,
) -> Result<SimReport> {
    check_samples(n)?;
    check_alpha(alpha)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidConfig(format!("background mean must be positive, got {beta}")));
    }
    if lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidConfig("signal values must be finite and nonnegative".into()));
    }
    with_workers(workers, || {
        let hists = lambda_grid
            .iter()
            .enumerate()
            .map(|(j, &l)| Substream::new(seed, j as u64).poisson_histogram(l + beta, n))
            .collect::<Result<Vec<_>>>()?;
        let intervals: HashMap<u64, LambdaInterval> = distinct_counts(&hists)
            .into_par_iter()
            .map(|x| Ok((x, lambda_interval(x, beta, alpha, epsilon)?)))
            .collect::<Result<_>>()?;
        let rows = lambda_grid
            .iter()
            .zip(&hists)
            .map(|(&l, hist)| CoverageRow {
                method: Method::Ebsb,
                parameter: l,
                coverage: covered_fraction(hist, n, |x| intervals[&x].contains(l)),
                n,
            })
            .collect();
        Ok(SimReport {
            table: SimTable::Coverage(rows),
            metadata: vec![
                ("beta".into(), beta.to_string()),
                ("alpha".into(), alpha.to_string()),
                ("n".into(), n.to_string()),
                ("seed".into(), seed.to_string()),
                ("eps".into(), epsilon.to_string()),
            ],
        })
    })
}

fn covered_fraction(hist: &[u64], n: u64, covers: impl Fn(u64) -> bool) -> f64 {
    let hits: u64 = hist.iter().enumerate().filter(|(x, c)| **c > 0 && covers(*x as u64)).map(|(_, c)| *c).sum();
    hits as f64 / n as f64
}

/// Coverage of the unconstrained plausibility interval for `theta`.
pub fn theta_coverage_simulation(
    theta_list: &[f64],
    alpha: f64,
    n: u64,
    seed: u64,
    epsilon: f64,
    workers: Option<usize>,
) -> Result<SimReport> {
    check_samples(n)?;
    check_alpha(alpha)?;
    for &t in theta_list {
        PoissonParam::new(t)?;
    }
    with_workers(workers, || {
        let hists = theta_list
            .iter()
            .enumerate()
            .map(|(j, &t)| Substream::new(seed, j as u64).poisson_histogram(t, n))
            .collect::<Result<Vec<_>>>()?;
        let intervals: HashMap<u64, PlausibilityInterval> = distinct_counts(&hists)
            .into_par_iter()
            .map(|x| Ok((x, plausibility_interval(x, alpha, epsilon)?)))
            .collect::<Result<_>>()?;
        let rows = theta_list
            .iter()
            .zip(&hists)
            .map(|(&t, hist)| CoverageRow {
                method: Method::Im,
                parameter: t,
                coverage: covered_fraction(hist, n, |x| intervals[&x].contains(t)),
                n,
            })
            .collect();
        Ok(SimReport {
            table: SimTable::Coverage(rows),
            metadata: vec![
                ("alpha".into(), alpha.to_string()),
                ("n".into(), n.to_string()),
                ("seed".into(), seed.to_string()),
                ("eps".into(), epsilon.to_string()),
            ],
        })
    })
}

/// Widths of the EB-SB `lambda` interval per count, next to the
/// unconstrained interval shifted into signal units (`theta - beta`).
pub fn width_table(beta: f64, x_range: RangeInclusive<u64>, alpha: f64, epsilon: f64) -> Result<SimReport> {
    check_alpha(alpha)?;
    let xs: Vec<u64> = x_range.collect();
    let rows = xs
        .par_iter()
        .map(|&x| {
            let eb = lambda_interval(x, beta, alpha, epsilon)?;
            let un = plausibility_interval(x, alpha, epsilon)?;
            Ok([
                WidthRow { x, method: Method::Ebsb, lower: eb.lower(), upper: eb.upper(), width: eb.width() },
                WidthRow {
                    x,
                    method: Method::Unconstrained,
                    lower: un.lower - beta,
                    upper: un.upper - beta,
                    width: un.width(),
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SimReport {
        table: SimTable::Width(rows),
        metadata: vec![("beta".into(), beta.to_string()), ("alpha".into(), alpha.to_string())],
    })
}
