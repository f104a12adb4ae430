//! Command-line front end.
//!
//! Subcommands: `bound` (closed-form evaluation, with sub-families),
//! `simulate` (Monte Carlo adversary tails vs bounds), `recycle` (delay
//! tail experiments), `counterexample` (the conditional collision probe),
//! and `verify` (exact-oracle sweeps plus the scalar inequality grids).
//!
//! Contract: exit status 0 when every emitted verdict passes, 1 when any
//! check fails, 2 on usage or configuration errors. Reports are
//! byte-identical across runs with the same arguments and seed except for
//! the timestamp comment. `AZUMA_LAB_THREADS` caps worker threads (0 or
//! unset picks the default).

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::adversary::{
    by_name, catalog, estimate_tail, verify_bound, Adversary, BudgetConstraint, EngineError,
    ScheduleAdversary, ScheduleError, TailDirection, TrialError, Verdict,
};
use crate::bounds::{
    additive_azuma, chernoff, check_log_inequalities, compare_recycling_bounds,
    lower_sharp_exponent, mgf_bound, mult_azuma_lower, mult_azuma_lower_sharp, mult_azuma_upper,
    mult_azuma_upper_sharp, recycling_delay_bound, upper_sharp_exponent, AdditiveQuery,
    BoundQuery, BoundsError, ChernoffQuery, ChernoffVariant, InequalityFamily,
};
use crate::oracle::{
    centered_mgf, exact_game, exact_sum_distribution, rational_to_f64, OracleError,
    DEFAULT_PATH_CAP,
};
use crate::recycling::{
    conditional_mean_check, counterexample_experiment, delay_tail_analyze, play, GameConfig,
    GameError, GameTrialError, RandomThrottle, StrategySpec,
};
use crate::report::{Record, Report, ReportFormat};
use crate::seeding::trial_seed;
use crate::stats::{StatsError, TailEstimate};
use crate::DEFAULT_SEED;

pub use crate::report::strip_timestamps;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Trial(#[from] TrialError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    GameTrial(#[from] GameTrialError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Kv,
    Csv,
}

impl FormatArg {
    fn to_report(self) -> ReportFormat {
        match self {
            FormatArg::Kv => ReportFormat::Kv,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Upper,
    Lower,
}

impl DirectionArg {
    fn to_direction(self) -> TailDirection {
        match self {
            DirectionArg::Upper => TailDirection::Upper,
            DirectionArg::Lower => TailDirection::Lower,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "azuma-lab",
    version,
    about = "Multiplicative bounded-increment tail bounds: closed forms, adversarial \
             Monte Carlo, recycling games, and exact verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for all randomized work [default: 0x5EED_A2A7]
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, hide_default_value = true)]
    seed: u64,

    /// Trial count; each subcommand has its own default
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Confidence level for every interval
    #[arg(long, global = true, default_value_t = 0.99)]
    confidence: f64,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Kv)]
    format: FormatArg,

    /// Write the report to this path instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Corrupt one bound comparison in `verify` (negative control)
    #[arg(long, global = true, hide = true)]
    inject_bad_bound: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate closed-form bounds
    Bound {
        #[command(subcommand)]
        family: BoundFamily,
    },
    /// Monte Carlo tail of a budgeted adversary vs the matching bound
    Simulate {
        /// Adversary name (iid_bernoulli, front_loaded, back_loaded,
        /// reactive_chaser[:f], point_mass_zero)
        #[arg(long, default_value = "iid_bernoulli")]
        adversary: String,
        /// TOML schedule file; overrides --adversary
        #[arg(long, value_name = "PATH")]
        adversary_config: Option<PathBuf>,
        /// Step count
        #[arg(long)]
        n: usize,
        /// Total mean budget
        #[arg(long)]
        mu: f64,
        /// Increment range [0, c]
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Tail offset
        #[arg(long)]
        delta: f64,
        /// Which tail the budget constrains
        #[arg(long, value_enum, default_value_t = DirectionArg::Upper)]
        direction: DirectionArg,
    },
    /// Recycling-game delay tails vs the threshold and direct bounds
    Recycle {
        /// Ball and bin count
        #[arg(long = "P")]
        p: u32,
        /// Toss budget
        #[arg(long = "M")]
        m: u64,
        /// Strategy (eager, single_file, random_throttle[:q], counterexample)
        #[arg(long, default_value = "eager")]
        strategy: String,
        /// Failure probability target
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Emit one record per game (seed, P, M, strategy, D, T)
        #[arg(long)]
        per_game: bool,
        /// With --per-game, also emit per-toss delays
        #[arg(long)]
        trace: bool,
    },
    /// Conditional collision probe falsifying the independence shortcut
    Counterexample {
        /// Ball and bin count (at least 3)
        #[arg(long = "P", default_value_t = 4)]
        p: u32,
        /// Start from the post-collision state instead of hunting for it
        #[arg(long)]
        constructed: bool,
        /// Collision hunt attempts per trial (waiting mode)
        #[arg(long, default_value_t = 64)]
        max_attempts: u32,
    },
    /// Exact-oracle sweeps, inequality grids, and self-checks
    Verify,
}

#[derive(Debug, Subcommand)]
enum BoundFamily {
    /// Pr[sum >= (1+delta) mu] <= exp(-delta^2 mu / ((2+delta) c))
    MultUpper {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Tail offset; repeatable for a sweep
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        /// Sweep grid start:end:step (inclusive)
        #[arg(long, value_name = "START:END:STEP")]
        delta_grid: Option<String>,
    },
    /// Pr[sum <= (1-delta) mu] <= exp(-delta^2 mu / (2 c)), delta < 1
    MultLower {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        #[arg(long, value_name = "START:END:STEP")]
        delta_grid: Option<String>,
    },
    /// Pr[sum >= eps] <= exp(-eps^2 / (2 sum c_i^2)) for ranges |X_i| <= c_i
    Additive {
        #[arg(long)]
        eps: f64,
        /// Per-step range; repeat once per step
        #[arg(long = "c", required = true)]
        c_list: Vec<f64>,
    },
    /// Classical Chernoff forms (the multiplicative ones are the c = 1 case)
    Chernoff {
        #[arg(long)]
        n: u64,
        /// Total mean; required for the multiplicative variants
        #[arg(long)]
        mu: Option<f64>,
        /// Additive offset; selects the additive variant
        #[arg(long)]
        eps: Option<f64>,
        /// Multiplicative offset; selects the multiplicative variant
        #[arg(long)]
        delta: Option<f64>,
        /// With --delta, bound the lower tail instead of the upper
        #[arg(long)]
        lower: bool,
    },
    /// Total-delay threshold 3M + 2P ln(1/eps) with its failure probability
    Recycling {
        #[arg(long = "P")]
        p: u32,
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        eps: f64,
    },
    /// Multiplicative vs additive route for Pr[D >= (1+delta) M]
    Compare {
        #[arg(long = "P")]
        p: u32,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        #[arg(long, value_name = "START:END:STEP")]
        delta_grid: Option<String>,
    },
}

/// Parses arguments from the process environment, runs the command, and
/// returns the exit status (0 pass, 1 fail, 2 usage error).
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("AZUMA_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("AZUMA_LAB_THREADS must be a nonnegative integer, got '{raw}'"))?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    if !(cli.confidence > 0.0 && cli.confidence < 1.0) {
        return Err(CliError::Usage(format!(
            "confidence must lie in (0, 1), got {}",
            cli.confidence
        )));
    }
    if cli.trials == Some(0) {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }

    let mut report = Report::new();
    report.comment(format!("azuma-lab {}", env!("CARGO_PKG_VERSION")));
    report.timestamp();

    let exit = match &cli.command {
        Command::Bound { family } => cmd_bound(family, &mut report)?,
        Command::Simulate {
            adversary,
            adversary_config,
            n,
            mu,
            c,
            delta,
            direction,
        } => cmd_simulate(
            &cli,
            adversary,
            adversary_config.as_deref(),
            *n,
            *mu,
            *c,
            *delta,
            direction.to_direction(),
            &mut report,
        )?,
        Command::Recycle {
            p,
            m,
            strategy,
            eps,
            per_game,
            trace,
        } => cmd_recycle(&cli, *p, *m, strategy, *eps, *per_game, *trace, &mut report)?,
        Command::Counterexample {
            p,
            constructed,
            max_attempts,
        } => cmd_counterexample(&cli, *p, *constructed, *max_attempts, &mut report)?,
        Command::Verify => cmd_verify(&cli, &mut report)?,
    };

    let rendered = report.render(cli.format.to_report());
    match &cli.out {
        Some(path) => fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(exit)
}

fn delta_list(deltas: &[f64], grid: Option<&str>) -> Result<Vec<f64>, CliError> {
    let mut all = deltas.to_vec();
    if let Some(spec) = grid {
        all.extend(parse_grid(spec)?);
    }
    if all.is_empty() {
        return Err(CliError::Usage(
            "provide at least one --delta or a --delta-grid".into(),
        ));
    }
    Ok(all)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must be START:END:STEP with step > 0, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let end: f64 = parts[1].parse().map_err(|_| bad())?;
    let step: f64 = parts[2].parse().map_err(|_| bad())?;
    if !start.is_finite() || !end.is_finite() || !step.is_finite() || step <= 0.0 || end < start {
        return Err(bad());
    }
    let mut out = Vec::new();
    let slop = step * 1e-9;
    let mut k = 0u64;
    loop {
        let v = start + k as f64 * step;
        if v > end + slop {
            break;
        }
        out.push(v);
        k += 1;
    }
    Ok(out)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    }
}

fn estimate_fields(record: Record, est: &TailEstimate) -> Record {
    record
        .field("trials", est.trials)
        .field("hits", est.hits)
        .field("point", est.point)
        .field("ci_lower", est.ci_lower)
        .field("ci_upper", est.ci_upper)
        .field("confidence", est.confidence)
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

fn cmd_bound(family: &BoundFamily, report: &mut Report) -> Result<i32, CliError> {
    match family {
        BoundFamily::MultUpper {
            mu,
            c,
            deltas,
            delta_grid,
        } => {
            for delta in delta_list(deltas, delta_grid.as_deref())? {
                let q = BoundQuery::new(*mu, *c, delta)?;
                let simple = mult_azuma_upper(&q)?;
                let sharp = mult_azuma_upper_sharp(&q)?;
                report.push(
                    Record::new("bound")
                        .field("family", "mult_upper")
                        .field("mu", *mu)
                        .field("c", *c)
                        .field("delta", delta)
                        .field("log", simple.log_value)
                        .field("value", simple.value)
                        .field("sharp_log", sharp.log_value)
                        .field("sharp_value", sharp.value),
                );
            }
        }
        BoundFamily::MultLower {
            mu,
            c,
            deltas,
            delta_grid,
        } => {
            for delta in delta_list(deltas, delta_grid.as_deref())? {
                let q = BoundQuery::new(*mu, *c, delta)?;
                let simple = mult_azuma_lower(&q)?;
                let sharp = mult_azuma_lower_sharp(&q)?;
                report.push(
                    Record::new("bound")
                        .field("family", "mult_lower")
                        .field("mu", *mu)
                        .field("c", *c)
                        .field("delta", delta)
                        .field("log", simple.log_value)
                        .field("value", simple.value)
                        .field("sharp_log", sharp.log_value)
                        .field("sharp_value", sharp.value),
                );
            }
        }
        BoundFamily::Additive { eps, c_list } => {
            let q = AdditiveQuery::new(*eps, c_list.clone())?;
            let b = additive_azuma(&q)?;
            report.push(
                Record::new("bound")
                    .field("family", "additive")
                    .field("eps", *eps)
                    .field("n", c_list.len())
                    .field("log", b.log_value)
                    .field("value", b.value),
            );
        }
        BoundFamily::Chernoff {
            n,
            mu,
            eps,
            delta,
            lower,
        } => {
            let (variant, name) = match (eps, delta) {
                (Some(_), None) => (ChernoffVariant::Additive, "chernoff_additive"),
                (None, Some(_)) if *lower => (ChernoffVariant::MultLower, "chernoff_mult_lower"),
                (None, Some(_)) => (ChernoffVariant::MultUpper, "chernoff_mult_upper"),
                _ => {
                    return Err(CliError::Usage(
                        "chernoff needs exactly one of --eps or --delta".into(),
                    ))
                }
            };
            if variant != ChernoffVariant::Additive && mu.is_none() {
                return Err(CliError::Usage(
                    "the multiplicative chernoff variants need --mu".into(),
                ));
            }
            let q = ChernoffQuery::new(*n, mu.unwrap_or(0.0), eps.unwrap_or(0.0), delta.unwrap_or(0.0))?;
            let b = chernoff(&q, variant)?;
            let mut rec = Record::new("bound").field("family", name).field("n", *n);
            if let Some(mu) = mu {
                rec = rec.field("mu", *mu);
            }
            if let Some(eps) = eps {
                rec = rec.field("eps", *eps);
            }
            if let Some(delta) = delta {
                rec = rec.field("delta", *delta);
            }
            report.push(rec.field("log", b.log_value).field("value", b.value));
        }
        BoundFamily::Recycling { p, m, eps } => {
            let b = recycling_delay_bound(*p, *m, *eps)?;
            report.push(
                Record::new("bound")
                    .field("family", "recycling")
                    .field("P", *p)
                    .field("M", *m)
                    .field("eps", *eps)
                    .field("threshold", b.threshold)
                    .field("failure_prob", b.failure_prob)
                    .field("case", b.case.as_str()),
            );
        }
        BoundFamily::Compare {
            p,
            m,
            deltas,
            delta_grid,
        } => {
            for delta in delta_list(deltas, delta_grid.as_deref())? {
                let cmp = compare_recycling_bounds(*p, *m, delta)?;
                report.push(
                    Record::new("bound")
                        .field("family", "compare")
                        .field("P", *p)
                        .field("M", *m)
                        .field("delta", delta)
                        .field("good_log", cmp.good.log_value)
                        .field("good_value", cmp.good.value)
                        .field("bad_log", cmp.bad.log_value)
                        .field("bad_value", cmp.bad.value)
                        .field("good_wins", cmp.good.value <= cmp.bad.value),
                );
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    adversary_name: &str,
    adversary_config: Option<&std::path::Path>,
    n: usize,
    mu: f64,
    c: f64,
    delta: f64,
    direction: TailDirection,
    report: &mut Report,
) -> Result<i32, CliError> {
    let trials = cli.trials.unwrap_or(100_000);
    let adversary: Box<dyn Adversary> = match adversary_config {
        Some(path) => Box::new(ScheduleAdversary::from_toml(&fs::read_to_string(path)?)?),
        None => by_name(adversary_name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown adversary '{adversary_name}'; catalog: {}",
                catalog()
                    .iter()
                    .map(|a| a.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?,
    };
    let constraint = BudgetConstraint::new(c, mu, n, direction)?;
    let q = BoundQuery::new(mu, c, delta)?;
    let (simple, sharp) = match direction {
        TailDirection::Upper => (mult_azuma_upper(&q)?, mult_azuma_upper_sharp(&q)?),
        TailDirection::Lower => (mult_azuma_lower(&q)?, mult_azuma_lower_sharp(&q)?),
    };
    let est = estimate_tail(
        adversary.as_ref(),
        &constraint,
        delta,
        trials,
        cli.seed,
        cli.confidence,
    )?;
    let verdict = verify_bound(&est, simple.value);

    let rec = Record::new("simulate")
        .field("adversary", adversary.name())
        .field(
            "direction",
            match direction {
                TailDirection::Upper => "upper",
                TailDirection::Lower => "lower",
            },
        )
        .field("n", n)
        .field("mu", mu)
        .field("c", c)
        .field("delta", delta)
        .field("threshold", constraint.threshold(delta))
        .field("seed", cli.seed);
    let rec = estimate_fields(rec, &est)
        .field("bound_log", simple.log_value)
        .field("bound_value", simple.value)
        .field("sharp_log", sharp.log_value)
        .field("sharp_value", sharp.value)
        .field("verdict", verdict_str(verdict));
    report.push(rec);
    Ok(if verdict.passed() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// recycle
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_recycle(
    cli: &Cli,
    p: u32,
    m: u64,
    strategy: &str,
    eps: f64,
    per_game: bool,
    trace: bool,
    report: &mut Report,
) -> Result<i32, CliError> {
    let trials = cli.trials.unwrap_or(10_000);
    let spec = StrategySpec::parse(strategy)
        .ok_or_else(|| CliError::Usage(format!("unknown strategy '{strategy}'")))?;
    let config = GameConfig::new(p, m)?;

    let mut game_records = Vec::new();
    let delays: Vec<u64> = if per_game || trace {
        // Sequential replay so per-game records can be emitted in order.
        let mut delays = Vec::with_capacity(trials as usize);
        for trial in 0..trials {
            let seed = trial_seed(cli.seed, trial);
            let mut strategy = spec.build();
            let g = play(config, strategy.as_mut(), seed)
                .map_err(|source| GameTrialError { trial, source })?;
            let mut rec = Record::new("game")
                .field("seed", g.seed)
                .field("P", g.p)
                .field("M", g.m)
                .field("strategy", g.strategy.as_str())
                .field("D", g.total_delay)
                .field("T", g.steps);
            if trace {
                let joined = g
                    .per_toss_delays
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                rec = rec.field("delays", joined);
            }
            game_records.push(rec);
            delays.push(g.total_delay);
        }
        delays
    } else {
        crate::recycling::run_games(config, &spec, trials, cli.seed)?
            .iter()
            .map(|s| s.total_delay)
            .collect()
    };

    let r = delay_tail_analyze(config, &spec.name(), &delays, eps, cli.seed, cli.confidence)?;

    let rec = Record::new("recycle")
        .field("P", p)
        .field("M", m)
        .field("strategy", spec.name())
        .field("eps", eps)
        .field("seed", cli.seed)
        .field("threshold", r.threshold_bound.threshold)
        .field("case", r.threshold_bound.case.as_str())
        .field("target", r.threshold_bound.failure_prob);
    let rec = estimate_fields(rec, &r.threshold_estimate)
        .field("mean_delay", r.mean_delay)
        .field("max_delay", r.max_delay)
        .field("verdict", verdict_str(r.threshold_verdict));
    report.push(rec);

    for check in &r.direct_checks {
        let rec = Record::new("delay_check")
            .field("delta", check.delta)
            .field("threshold", check.threshold)
            .field("bound_log", check.bound.log_value)
            .field("bound_value", check.bound.value);
        report.push(
            estimate_fields(rec, &check.estimate).field("verdict", verdict_str(check.verdict)),
        );
    }

    for rec in game_records {
        report.push(rec);
    }
    Ok(if r.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// counterexample
// ---------------------------------------------------------------------------

fn cmd_counterexample(
    cli: &Cli,
    p: u32,
    constructed: bool,
    max_attempts: u32,
    report: &mut Report,
) -> Result<i32, CliError> {
    let trials = cli.trials.unwrap_or(100_000);
    let r = counterexample_experiment(p, trials, cli.seed, max_attempts, constructed, cli.confidence)?;

    // Pass: the interval brackets the corrected value, and the old claim is
    // excluded whenever it differs from the corrected value.
    let brackets = r.estimate.ci_lower <= r.corrected && r.corrected <= r.estimate.ci_upper;
    let boundary = r.corrected == r.claimed;
    let pass = brackets && (boundary || r.falsified);

    let rec = Record::new("counterexample")
        .field("P", p)
        .field("mode", if constructed { "constructed" } else { "waiting" })
        .field("max_attempts", max_attempts)
        .field("seed", cli.seed)
        .field("collisions", r.collisions)
        .field("no_collision_fraction", r.no_collision_fraction);
    let rec = estimate_fields(rec, &r.estimate)
        .field("corrected", r.corrected)
        .field("claimed", r.claimed)
        .field("claim_margin", r.estimate.ci_lower / r.claimed)
        .field("falsified", r.falsified)
        .field(
            "verdict",
            verdict_str(if pass { Verdict::Pass } else { Verdict::Fail }),
        );
    report.push(rec);
    Ok(if pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckOutcome {
    record: Record,
    pass: bool,
}

fn check_record(name: &str, cases: usize, worst: f64, pass: bool) -> CheckOutcome {
    CheckOutcome {
        record: Record::new("check")
            .field("name", name)
            .field("cases", cases)
            .field("worst", worst)
            .field("verdict", verdict_str(if pass { Verdict::Pass } else { Verdict::Fail })),
        pass,
    }
}

fn cmd_verify(cli: &Cli, report: &mut Report) -> Result<i32, CliError> {
    let trials = cli.trials.unwrap_or(20_000);
    let mut checks: Vec<CheckOutcome> = Vec::new();

    // Scalar log inequality grids.
    let upper_grid: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.01).collect();
    let points = check_log_inequalities(InequalityFamily::Upper, &upper_grid)?;
    let worst = points.iter().map(|p| p.slack).fold(f64::NEG_INFINITY, f64::max);
    checks.push(check_record(
        "inequality_upper_grid",
        points.len(),
        worst,
        points.iter().all(|p| p.holds),
    ));

    let lower_grid: Vec<f64> = (0..=999).map(|i| i as f64 * 0.001).collect();
    let points = check_log_inequalities(InequalityFamily::Lower, &lower_grid)?;
    let worst = points.iter().map(|p| p.slack).fold(f64::NEG_INFINITY, f64::max);
    checks.push(check_record(
        "inequality_lower_grid",
        points.len(),
        worst,
        points.iter().all(|p| p.holds),
    ));

    // Sharp forms never exceed the simple forms.
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    let mut pass = true;
    for i in 1..=400 {
        let d = i as f64 * 0.025;
        let gap = upper_sharp_exponent(d) - (-d * d / (2.0 + d));
        worst = worst.max(gap);
        pass &= gap <= 1e-12;
        cases += 1;
        if d < 1.0 {
            let gap = lower_sharp_exponent(d) - (-d * d / 2.0);
            worst = worst.max(gap);
            pass &= gap <= 1e-12;
            cases += 1;
        }
    }
    checks.push(check_record("sharp_below_simple", cases, worst, pass));

    // Exact adversary tails never exceed the bounds (the corrupted control
    // replaces every bound with an absurdly small one).
    let injected = cli.inject_bad_bound;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    let mut pass = true;
    for mu in [1.0, 2.5] {
        let constraint = BudgetConstraint::new(1.0, mu, 5, TailDirection::Upper)?;
        for adversary in catalog() {
            let dist = exact_sum_distribution(adversary.as_ref(), &constraint, DEFAULT_PATH_CAP)?;
            for delta in [0.25, 0.5, 1.0, 2.0] {
                let q = BoundQuery::new(mu, 1.0, delta)?;
                let exact = rational_to_f64(&dist.tail(TailDirection::Upper, constraint.threshold(delta)));
                for bound in [mult_azuma_upper(&q)?, mult_azuma_upper_sharp(&q)?] {
                    let limit = if injected { 1e-12 } else { bound.value };
                    let gap = exact - limit;
                    worst = worst.max(gap);
                    pass &= gap <= 1e-12;
                    cases += 1;
                }
            }
        }
    }
    checks.push(check_record("exact_vs_upper_bounds", cases, worst, pass));

    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    let mut pass = true;
    let floor = BudgetConstraint::new(1.0, 2.5, 5, TailDirection::Lower)?;
    for adversary in catalog() {
        if adversary.name() == "point_mass_zero" {
            continue; // cannot satisfy a positive floor
        }
        let dist = exact_sum_distribution(adversary.as_ref(), &floor, DEFAULT_PATH_CAP)?;
        for delta in [0.25, 0.5, 0.75] {
            let q = BoundQuery::new(2.5, 1.0, delta)?;
            let exact = rational_to_f64(&dist.tail(TailDirection::Lower, floor.threshold(delta)));
            for bound in [mult_azuma_lower(&q)?, mult_azuma_lower_sharp(&q)?] {
                let gap = exact - bound.value;
                worst = worst.max(gap);
                pass &= gap <= 1e-12;
                cases += 1;
            }
        }
    }
    checks.push(check_record("exact_vs_lower_bounds", cases, worst, pass));

    // Frozen exact game distributions.
    let mut pass = true;
    let two = exact_game(GameConfig::new(2, 2)?, &StrategySpec::Eager, cli.seed, DEFAULT_PATH_CAP)?;
    pass &= two.paths == 4
        && rational_to_f64(&two.tail_at_least(1)) == 0.5
        && rational_to_f64(&two.total_probability()) == 1.0;
    let three = exact_game(GameConfig::new(3, 3)?, &StrategySpec::Eager, cli.seed, DEFAULT_PATH_CAP)?;
    pass &= three.paths == 27
        && rational_to_f64(&three.mean()) == 1.0
        && rational_to_f64(&three.tail_at_least(1)) == 7.0 / 9.0
        && rational_to_f64(&three.tail_at_least(2)) == 1.0 / 9.0;
    let single = exact_game(GameConfig::new(3, 2)?, &StrategySpec::SingleFile, cli.seed, DEFAULT_PATH_CAP)?;
    pass &= single.delays.len() == 1 && rational_to_f64(&single.tail_at_least(1)) == 0.0;
    checks.push(check_record("exact_games_frozen", 3, if pass { 0.0 } else { 1.0 }, pass));

    // Per-toss vs occupancy accounting at termination.
    let mut pass = true;
    for k in 0..20u64 {
        let mut strategy = RandomThrottle { q: 0.6 };
        let g = play(GameConfig::new(5, 24)?, &mut strategy, trial_seed(cli.seed, k))
            .map_err(|source| GameTrialError { trial: k, source })?;
        let toss_sum: u64 = g.per_toss_delays.iter().map(|&d| d as u64).sum();
        pass &= toss_sum == g.total_delay;
    }
    checks.push(check_record("game_accounting_identity", 20, 0.0, pass));

    // Conditional probe from the constructed collision state.
    let ce = counterexample_experiment(4, trials, cli.seed, 1, true, cli.confidence)?;
    let pass = ce.estimate.ci_lower <= 0.25
        && 0.25 <= ce.estimate.ci_upper
        && ce.falsified
        && ce.claimed == 0.0625;
    checks.push(check_record(
        "counterexample_constructed",
        trials as usize,
        ce.estimate.point,
        pass,
    ));

    // Conditional mean of the next toss's delay from a loaded state.
    let state = crate::recycling::GameState::with_layout(
        GameConfig::new(4, 4)?,
        &[(2, vec![2, 3, 4])],
    )?;
    let cm = conditional_mean_check(&state, trials, cli.seed, cli.confidence)?;
    checks.push(check_record(
        "conditional_mean_cap",
        trials as usize,
        cm.estimate.mean,
        cm.pass,
    ));

    // MGF envelope domination over two- and three-point supports.
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    let mut pass = true;
    for s in [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
        for dist in [
            crate::adversary::IncrementDistribution::two_point_mean(1.0, s),
            crate::adversary::IncrementDistribution::three_point_mean(1.0, s),
        ] {
            let a = dist.mean();
            for t in [-4.0, -2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0, 4.0] {
                let gap = centered_mgf(&dist, t) - mgf_bound(t, a, 1.0 - a)?;
                worst = worst.max(gap);
                pass &= gap <= 1e-12;
                cases += 1;
            }
        }
    }
    checks.push(check_record("mgf_envelope", cases, worst, pass));

    // Monte Carlo layer: bit-stable across repeat runs, interval brackets
    // the exact tail.
    let constraint = BudgetConstraint::new(1.0, 4.0, 16, TailDirection::Upper)?;
    let a = estimate_tail(&crate::adversary::IidBernoulli, &constraint, 0.5, trials, cli.seed, cli.confidence)?;
    let b = estimate_tail(&crate::adversary::IidBernoulli, &constraint, 0.5, trials, cli.seed, cli.confidence)?;
    checks.push(check_record("mc_determinism", trials as usize, 0.0, a == b));

    let dist = exact_sum_distribution(&crate::adversary::IidBernoulli, &constraint, DEFAULT_PATH_CAP)?;
    let exact = rational_to_f64(&dist.tail(TailDirection::Upper, constraint.threshold(0.5)));
    let pass = a.ci_lower <= exact && exact <= a.ci_upper;
    checks.push(check_record("mc_interval_covers_exact", trials as usize, exact, pass));

    let all_pass = checks.iter().all(|c| c.pass);
    for c in checks {
        report.push(c.record);
    }
    report.push(
        Record::new("verify")
            .field("seed", cli.seed)
            .field("trials", trials)
            .field(
                "verdict",
                verdict_str(if all_pass { Verdict::Pass } else { Verdict::Fail }),
            ),
    );
    Ok(if all_pass { 0 } else { 1 })
}
