use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use impois::baselines::{equal_tail_pvalue, normal_approx_pvalue};
use impois::csv::{write_table, Cell};
use impois::experiments::{
    coverage_simulation, pl_cdf_simulation, theta_coverage_simulation, validity_report, width_table, SimConfig,
};
use impois::im::one_sided;
use impois::ordering::{build_ranking, diagnostics};
use impois::two_sided::{plausibility_curve, plausibility_interval, point_plausibility};
use impois::{constrained, Assertion, Error, DEFAULT_EPSILON};

#[derive(Parser)]
#[command(name = "impois", version, about = "Inferential models for the Poisson mean")]
struct Cli {
    /// Write CSV to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Eps {
    /// Truncation tolerance of the sample space.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
}

#[derive(Args, Clone)]
struct Sim {
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "IMPOIS_WORKERS")]
    workers: Option<usize>,
    /// Prefix the CSV with `# key=value` metadata lines.
    #[arg(long)]
    meta: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Greater,
    LessEqual,
}

#[derive(Subcommand)]
enum Command {
    /// Plausibility of {theta0} given x.
    PlPoint {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        theta0: f64,
        #[command(flatten)]
        eps: Eps,
    },
    /// Plausibility curve on an evenly spaced theta grid.
    PlCurve {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        theta_min: f64,
        #[arg(long)]
        theta_max: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Add normal and equal-tail p-value columns.
        #[arg(long)]
        baselines: bool,
        #[command(flatten)]
        eps: Eps,
    },
    /// Plausibility interval {theta : pl_x(theta) > alpha}.
    Interval {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        eps: Eps,
    },
    /// Optimal belief/plausibility for a one-sided assertion.
    OneSided {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        theta0: f64,
        #[arg(long, value_enum, default_value_t = Side::Greater)]
        side: Side,
    },
    /// Recursive ordering at theta0 with cumulative T(r), V(r).
    Ordering {
        #[arg(long)]
        theta0: f64,
        #[command(flatten)]
        eps: Eps,
    },
    /// EB-SB plausibility interval for the signal lambda.
    LambdaInterval {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        eps: Eps,
    },
    /// Empirical CDF of plausibility values under Pois(theta).
    SimPlcdf {
        #[arg(long)]
        theta0: f64,
        /// True means to simulate from, comma separated.
        #[arg(long = "theta", value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[command(flatten)]
        sim: Sim,
        #[command(flatten)]
        eps: Eps,
    },
    /// Interval coverage. With --beta: EB-SB coverage of lambda; without:
    /// unconstrained coverage of theta.
    SimCoverage {
        #[arg(long)]
        beta: Option<f64>,
        /// Parameter values (lambda with --beta, theta otherwise), comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "step"])]
        values: Option<Vec<f64>>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        sim: Sim,
        #[command(flatten)]
        eps: Eps,
    },
    /// EB-SB and unconstrained interval widths per count.
    SimWidth {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        x_min: u64,
        #[arg(long, default_value_t = 30)]
        x_max: u64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[command(flatten)]
        eps: Eps,
    },
    /// Validity check at the null for the IM and both baselines.
    Validity {
        #[arg(long)]
        theta0: f64,
        #[command(flatten)]
        sim: Sim,
        #[command(flatten)]
        eps: Eps,
    },
}

fn parameter_grid(values: Option<Vec<f64>>, from: Option<f64>, to: Option<f64>, step: Option<f64>) -> Result<Vec<f64>, Error> {
    if let Some(v) = values {
        return Ok(v);
    }
    match (from, to, step) {
        (Some(a), Some(b), Some(s)) if s > 0.0 && b >= a => {
            let n = ((b - a) / s + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + s * i as f64).collect())
        }
        _ => Err(Error::InvalidConfig("give --values or a valid --from/--to/--step".into())),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.command {
        Command::PlPoint { x, theta0, eps } => {
            let pl = point_plausibility(x, theta0, eps.eps)?;
            write_table(&mut out, &["x", "theta0", "pl"], &[vec![x.into(), theta0.into(), pl.into()]])?;
        }
        Command::PlCurve { x, theta_min, theta_max, n, baselines, eps } => {
            if n < 2 || !(theta_max > theta_min) {
                return Err(Error::InvalidConfig("need --n >= 2 and --theta-max > --theta-min".into()));
            }
            let grid: Vec<f64> =
                (0..n).map(|i| theta_min + (theta_max - theta_min) * i as f64 / (n - 1) as f64).collect();
            let curve = plausibility_curve(x, &grid, eps.eps)?;
            let mut rows = Vec::with_capacity(n);
            for (&t, &v) in curve.theta_grid.iter().zip(&curve.values) {
                let mut row: Vec<Cell> = vec![t.into(), v.into()];
                if baselines {
                    row.push(normal_approx_pvalue(x, t)?.into());
                    row.push(equal_tail_pvalue(x, t)?.capped.into());
                }
                rows.push(row);
            }
            let cols: &[&str] = if baselines { &["theta", "pl", "normal", "equal_tail"] } else { &["theta", "pl"] };
            write_table(&mut out, cols, &rows)?;
        }
        Command::Interval { x, alpha, eps } => {
            let iv = plausibility_interval(x, alpha, eps.eps)?;
            write_table(
                &mut out,
                &["x", "alpha", "lower", "upper", "contiguous"],
                &[vec![x.into(), alpha.into(), iv.lower.into(), iv.upper.into(), iv.contiguous.into()]],
            )?;
        }
        Command::OneSided { x, theta0, side } => {
            let (assertion, name) = match side {
                Side::Greater => (Assertion::greater(theta0)?, "greater"),
                Side::LessEqual => (Assertion::less_equal(theta0)?, "less-equal"),
            };
            let pair = one_sided(x, &assertion)?;
            write_table(
                &mut out,
                &["x", "theta0", "side", "bel", "pl"],
                &[vec![x.into(), theta0.into(), name.into(), pair.belief.into(), pair.plausibility.into()]],
            )?;
        }
        Command::Ordering { theta0, eps } => {
            let ranking = build_ranking(theta0, eps.eps)?;
            let diag = diagnostics(&ranking);
            let rows: Vec<Vec<Cell>> = ranking
                .support()
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let s = ranking.scores(x);
                    vec![((i + 1) as u64).into(), x.into(), s.t.into(), s.v.into(), diag.t[i].into(), diag.v[i].into()]
                })
                .collect();
            write_table(&mut out, &["rank", "x", "t", "v", "T_r", "V_r"], &rows)?;
        }
        Command::LambdaInterval { x, beta, alpha, eps } => {
            let li = constrained::lambda_interval(x, beta, alpha, eps.eps)?;
            write_table(
                &mut out,
                &["x", "beta", "alpha", "lambda_lower", "lambda_upper", "conflict_mass"],
                &[vec![x.into(), beta.into(), alpha.into(), li.lower().into(), li.upper().into(), li.conflict_mass.into()]],
            )?;
        }
        Command::SimPlcdf { theta0, theta, sim, eps } => {
            let mut cfg = SimConfig::new(theta0, theta.clone(), sim.n, sim.seed);
            cfg.epsilon = eps.eps;
            cfg.workers = sim.workers;
            let report = pl_cdf_simulation(&cfg)?;
            if sim.meta {
                report.write_metadata(&mut out)?;
            }
            report.write_csv(&mut out)?;
            if theta.contains(&theta0) {
                let v = validity_report(&cfg)?;
                for e in &v.entries {
                    eprintln!(
                        "validity {:<10} theta0={} n={} max_excess={:+.5} at alpha={:.2} -> {}",
                        e.method.as_str(),
                        theta0,
                        sim.n,
                        e.max_excess,
                        e.worst_alpha,
                        if e.pass { "pass" } else { "FAIL" }
                    );
                }
            }
        }
        Command::SimCoverage { beta, values, from, to, step, alpha, sim, eps } => {
            let grid = parameter_grid(values, from, to, step)?;
            let report = match beta {
                Some(b) => coverage_simulation(b, &grid, alpha, sim.n, sim.seed, eps.eps, sim.workers)?,
                None => theta_coverage_simulation(&grid, alpha, sim.n, sim.seed, eps.eps, sim.workers)?,
            };
            if sim.meta {
                report.write_metadata(&mut out)?;
            }
            report.write_csv(&mut out)?;
        }
        Command::SimWidth { beta, x_min, x_max, alpha, eps } => {
            if x_max < x_min {
                return Err(Error::InvalidConfig("--x-max must be at least --x-min".into()));
            }
            width_table(beta, x_min..=x_max, alpha, eps.eps)?.write_csv(&mut out)?;
        }
        Command::Validity { theta0, sim, eps } => {
            let mut cfg = SimConfig::new(theta0, vec![theta0], sim.n, sim.seed);
            cfg.epsilon = eps.eps;
            cfg.workers = sim.workers;
            validity_report(&cfg)?.write_csv(&mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::OrderingStopped(_) => ExitCode::from(3),
                Error::Domain(_) | Error::InvalidConfig(_) | Error::NotInSupport { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
