//! Budget-constrained adaptive adversaries and the Monte Carlo engine that
//! runs them.
//!
//! An adversary is a deterministic callback: given the realized history, the
//! remaining mean budget, and the step index, it proposes a distribution for
//! the next increment, supported on [0, c]. The engine samples it, charges
//! the distribution's mean against the budget, and enforces the constraint
//! itself, so a misbehaving adversary is an error, never a silently wrong
//! estimate:
//!
//! * `Upper` direction: the running sum of conditional means may never
//!   exceed mu (a cap);
//! * `Lower` direction: the sum of means must reach at least mu by the last
//!   step (a floor).
//!
//! Both checks use a 1e-12 relative tolerance so budget-exact adversaries
//! survive float accumulation. All randomness comes from the engine's
//! per-trial ChaCha8 stream ([`crate::seeding`]); adversaries never see the
//! RNG, which is what makes trials replayable and parallelizable.

use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::seeding::trial_rng;
use crate::stats::{StatsError, TailEstimate};

pub(crate) const BUDGET_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("distribution at step {step} is empty")]
    EmptySupport { step: usize },
    #[error("distribution at step {step} has a non-finite entry ({value}, {prob})")]
    NonFiniteEntry { step: usize, value: f64, prob: f64 },
    #[error("distribution at step {step} has negative probability {prob}")]
    NegativeProbability { step: usize, prob: f64 },
    #[error("distribution probabilities at step {step} sum to {total}, not 1")]
    ProbabilitiesDoNotSumToOne { step: usize, total: f64 },
    #[error("support value {value} at step {step} lies outside [0, {c}]")]
    SupportViolation { step: usize, value: f64, c: f64 },
    #[error(
        "budget violation at step {step}: cumulative mean {spent} exceeds the cap {mu}"
    )]
    BudgetViolation { step: usize, spent: f64, mu: f64 },
    #[error(
        "budget violation at trial end: cumulative mean {spent} is below the floor {mu}"
    )]
    FloorViolation { spent: f64, mu: f64 },
    #[error("constraint is invalid: {0}")]
    BadConstraint(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// An [`EngineError`] tagged with the trial that produced it.
#[derive(Debug, Error, PartialEq)]
#[error("trial {trial}: {source}")]
pub struct TrialError {
    pub trial: u64,
    #[source]
    pub source: EngineError,
}

/// Which tail the budget constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailDirection {
    /// Mean budget is a cap; the interesting event is sum >= (1+delta) mu.
    Upper,
    /// Mean budget is a floor; the interesting event is sum <= (1-delta) mu.
    Lower,
}

impl TailDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailDirection::Upper => "upper",
            TailDirection::Lower => "lower",
        }
    }
}

/// A finite-support distribution over increment values.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDistribution {
    /// (value, probability) pairs; probabilities sum to 1 within 1e-12.
    pub support: Vec<(f64, f64)>,
}

impl IncrementDistribution {
    /// Validates shape-level invariants (the [0, c] range check belongs to
    /// the engine, which knows c).
    pub fn validate(&self, step: usize) -> Result<(), EngineError> {
        if self.support.is_empty() {
            return Err(EngineError::EmptySupport { step });
        }
        let mut total = 0.0;
        for &(value, prob) in &self.support {
            if !value.is_finite() || !prob.is_finite() {
                return Err(EngineError::NonFiniteEntry { step, value, prob });
            }
            if prob < 0.0 {
                return Err(EngineError::NegativeProbability { step, prob });
            }
            total += prob;
        }
        if (total - 1.0).abs() > BUDGET_REL_TOL {
            return Err(EngineError::ProbabilitiesDoNotSumToOne { step, total });
        }
        Ok(())
    }

    /// Mean as the engine charges it: a left fold over the support in order.
    pub fn mean(&self) -> f64 {
        self.support.iter().fold(0.0, |acc, (v, p)| acc + v * p)
    }

    /// Point mass at `value`.
    pub fn point_mass(value: f64) -> Self {
        IncrementDistribution {
            support: vec![(value, 1.0)],
        }
    }

    /// Two-point distribution on {0, c} with the given mean, clamped into
    /// the feasible range [0, c]. Zero-probability endpoints are dropped so
    /// the support stays minimal for exact enumeration.
    pub fn two_point_mean(c: f64, mean: f64) -> Self {
        let p = (mean / c).clamp(0.0, 1.0);
        if p <= 0.0 {
            Self::point_mass(0.0)
        } else if p >= 1.0 {
            Self::point_mass(c)
        } else {
            IncrementDistribution {
                support: vec![(0.0, 1.0 - p), (c, p)],
            }
        }
    }

    /// Three-point distribution on {0, c/2, c} with the given mean: the
    /// middle point takes weight min(s, c-s)/c, the rest lands on the
    /// endpoints. Degenerates gracefully at the boundaries.
    pub fn three_point_mean(c: f64, mean: f64) -> Self {
        let s = mean.clamp(0.0, c);
        if s <= 0.0 {
            return Self::point_mass(0.0);
        }
        if s >= c {
            return Self::point_mass(c);
        }
        let p_mid = s.min(c - s) / c;
        let p_top = s / c - p_mid / 2.0;
        let p_zero = 1.0 - p_mid - p_top;
        let mut support = Vec::with_capacity(3);
        if p_zero > 0.0 {
            support.push((0.0, p_zero));
        }
        support.push((c / 2.0, p_mid));
        if p_top > 0.0 {
            support.push((c, p_top));
        }
        IncrementDistribution { support }
    }
}

/// The constraint an adversary plays against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetConstraint {
    /// Increment range: every proposed value must lie in [0, c].
    pub c: f64,
    /// Total mean budget (cap or floor per `direction`).
    pub mu: f64,
    /// Number of steps per trial.
    pub n: usize,
    pub direction: TailDirection,
}

impl BudgetConstraint {
    pub fn new(c: f64, mu: f64, n: usize, direction: TailDirection) -> Result<Self, EngineError> {
        let k = BudgetConstraint { c, mu, n, direction };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(EngineError::BadConstraint(format!(
                "c must be positive and finite, got {}",
                self.c
            )));
        }
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(EngineError::BadConstraint(format!(
                "mu must be nonnegative and finite, got {}",
                self.mu
            )));
        }
        if self.n == 0 {
            return Err(EngineError::BadConstraint("n must be at least 1".into()));
        }
        if self.direction == TailDirection::Lower && self.mu > self.n as f64 * self.c {
            return Err(EngineError::BadConstraint(format!(
                "floor budget mu = {} is unreachable with n * c = {}",
                self.mu,
                self.n as f64 * self.c
            )));
        }
        Ok(())
    }

    /// Tail event threshold for offset delta: (1+delta) mu for the upper
    /// direction, (1-delta) mu for the lower.
    pub fn threshold(&self, delta: f64) -> f64 {
        match self.direction {
            TailDirection::Upper => (1.0 + delta) * self.mu,
            TailDirection::Lower => (1.0 - delta) * self.mu,
        }
    }
}

/// What an adversary sees when choosing the next increment distribution.
#[derive(Debug)]
pub struct StepContext<'a> {
    /// Realized increments so far, oldest first.
    pub history: &'a [f64],
    /// mu minus the means charged so far. For the upper direction this is
    /// what may still be spent; for the lower it is what must still be spent.
    pub remaining_budget: f64,
    /// 0-based step index; the trial has constraint.n steps.
    pub step: usize,
    pub constraint: &'a BudgetConstraint,
}

impl StepContext<'_> {
    pub fn steps_left(&self) -> usize {
        self.constraint.n - self.step
    }
}

/// A deterministic per-step policy. Implementations must be pure functions
/// of the context so a trial replays identically from its seed.
pub trait Adversary: Sync {
    fn name(&self) -> String;
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution;
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTrace {
    /// Realized increments X_1..X_n.
    pub increments: Vec<f64>,
    /// Conditional means the engine charged, one per step.
    pub means: Vec<f64>,
    /// Left-fold sum of the increments, exactly as accumulated.
    pub sum: f64,
    /// Left-fold sum of the means.
    pub budget_used: f64,
}

/// Runs one trial of `adversary` against `constraint` on the trial RNG
/// derived from (`master_seed`, `trial`).
pub fn run_trial(
    adversary: &dyn Adversary,
    constraint: &BudgetConstraint,
    master_seed: u64,
    trial: u64,
) -> Result<ProcessTrace, EngineError> {
    constraint.validate()?;
    let mut rng = trial_rng(master_seed, trial);
    let mut increments = Vec::with_capacity(constraint.n);
    let mut means = Vec::with_capacity(constraint.n);
    let mut sum = 0.0f64;
    let mut budget_used = 0.0f64;
    let cap = constraint.mu * (1.0 + BUDGET_REL_TOL);

    for step in 0..constraint.n {
        let ctx = StepContext {
            history: &increments,
            remaining_budget: constraint.mu - budget_used,
            step,
            constraint,
        };
        let dist = adversary.choose(&ctx);
        dist.validate(step)?;
        for &(value, _) in &dist.support {
            if value < 0.0 || value > constraint.c {
                return Err(EngineError::SupportViolation {
                    step,
                    value,
                    c: constraint.c,
                });
            }
        }
        let mean = dist.mean();
        budget_used += mean;
        if constraint.direction == TailDirection::Upper && budget_used > cap {
            return Err(EngineError::BudgetViolation {
                step,
                spent: budget_used,
                mu: constraint.mu,
            });
        }
        let x = sample(&dist, &mut rng);
        sum += x;
        increments.push(x);
        means.push(mean);
    }

    if constraint.direction == TailDirection::Lower
        && budget_used < constraint.mu * (1.0 - BUDGET_REL_TOL)
    {
        return Err(EngineError::FloorViolation {
            spent: budget_used,
            mu: constraint.mu,
        });
    }

    Ok(ProcessTrace {
        increments,
        means,
        sum,
        budget_used,
    })
}

/// Inverse-CDF sampling with a single uniform draw: walk the support in
/// order accumulating probability. The final entry absorbs any sub-1e-12
/// probability deficit so sampling is total.
fn sample(dist: &IncrementDistribution, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(value, prob) in &dist.support {
        acc += prob;
        if u < acc {
            return value;
        }
    }
    dist.support[dist.support.len() - 1].0
}

/// Monte Carlo estimate of the tail event at offset `delta` (the event is
/// sum >= (1+delta) mu for upper constraints, sum <= (1-delta) mu for
/// lower). Trials run in parallel; hit counts and therefore the estimate
/// are identical for every thread count, and errors are reported for the
/// lowest failing trial index.
pub fn estimate_tail(
    adversary: &dyn Adversary,
    constraint: &BudgetConstraint,
    delta: f64,
    trials: u64,
    master_seed: u64,
    confidence: f64,
) -> Result<TailEstimate, TrialError> {
    let threshold = constraint.threshold(delta);
    let chunk = 4096u64;
    let n_chunks = trials.div_ceil(chunk);
    let outcome = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = (lo + chunk).min(trials);
            let mut hits = 0u64;
            for trial in lo..hi {
                match run_trial(adversary, constraint, master_seed, trial) {
                    Ok(trace) => {
                        let hit = match constraint.direction {
                            TailDirection::Upper => trace.sum >= threshold,
                            TailDirection::Lower => trace.sum <= threshold,
                        };
                        if hit {
                            hits += 1;
                        }
                    }
                    Err(source) => return Err(TrialError { trial, source }),
                }
            }
            Ok(hits)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b));
    // try_reduce may surface any failing chunk; re-resolve deterministically
    // to the lowest failing trial so error reports are reproducible.
    let hits = match outcome {
        Ok(hits) => hits,
        Err(first) => {
            let mut lowest = first;
            for trial in 0..lowest.trial {
                if let Err(source) = run_trial(adversary, constraint, master_seed, trial) {
                    lowest = TrialError { trial, source };
                    break;
                }
            }
            return Err(lowest);
        }
    };
    TailEstimate::from_hits(hits, trials, confidence).map_err(|e| TrialError {
        trial: 0,
        source: EngineError::Stats(e),
    })
}

/// PASS/FAIL verdict for an estimate against a bound: PASS when the
/// interval's lower end does not exceed the bound (the bound is not
/// statistically refuted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

pub fn verify_bound(estimate: &TailEstimate, bound_value: f64) -> Verdict {
    if estimate.ci_lower <= bound_value {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// i.i.d. two-point {0, c} steps with mean mu/n each: spends the budget
/// exactly, uniformly.
pub struct IidBernoulli;

/// Spends min(remaining, c) every step, so the whole budget goes as early
/// as possible; with mu <= c that is a single opening burst.
pub struct FrontLoaded;

/// Mirrors FrontLoaded: proposes zero until the remaining steps are only
/// just enough to spend the budget at rate c, then spends flat out.
pub struct BackLoaded;

/// Spends aggressively only when the realized sum is running above the
/// charged means (a "hot" trajectory), and at a half-paced trickle when
/// cold, subject to the floor needed to stay budget-exact. Uses three-point
/// supports, and is genuinely adaptive: a naive independence analysis has
/// no single per-step distribution to plug in.
pub struct ReactiveChaser {
    /// Fraction of the even pace spent when cold, default 0.5.
    pub cold_fraction: f64,
}

impl Default for ReactiveChaser {
    fn default() -> Self {
        ReactiveChaser { cold_fraction: 0.5 }
    }
}

/// Always proposes the point mass at 0. Never spends; for lower (floor)
/// constraints it is only lawful when mu = 0.
pub struct PointMassZero;

impl Adversary for IidBernoulli {
    fn name(&self) -> String {
        "iid_bernoulli".into()
    }
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        let per_step = ctx.constraint.mu / ctx.constraint.n as f64;
        IncrementDistribution::two_point_mean(ctx.constraint.c, per_step)
    }
}

impl Adversary for FrontLoaded {
    fn name(&self) -> String {
        "front_loaded".into()
    }
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        let spend = ctx.remaining_budget.max(0.0).min(ctx.constraint.c);
        IncrementDistribution::two_point_mean(ctx.constraint.c, spend)
    }
}

impl Adversary for BackLoaded {
    fn name(&self) -> String {
        "back_loaded".into()
    }
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        let must_spend = forced_spend(ctx);
        IncrementDistribution::two_point_mean(ctx.constraint.c, must_spend)
    }
}

impl Adversary for ReactiveChaser {
    fn name(&self) -> String {
        "reactive_chaser".into()
    }
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        let r = ctx.remaining_budget.max(0.0);
        let cap = r.min(ctx.constraint.c);
        let pace = r / ctx.steps_left() as f64;
        let realized: f64 = ctx.history.iter().sum();
        let charged = ctx.constraint.mu - ctx.remaining_budget;
        let hot = realized > charged;
        let desired = if hot { cap } else { self.cold_fraction * pace };
        let spend = desired.clamp(forced_spend(ctx), cap);
        IncrementDistribution::three_point_mean(ctx.constraint.c, spend)
    }
}

impl Adversary for PointMassZero {
    fn name(&self) -> String {
        "point_mass_zero".into()
    }
    fn choose(&self, _ctx: &StepContext<'_>) -> IncrementDistribution {
        IncrementDistribution::point_mass(0.0)
    }
}

/// Minimum mean that must be spent this step for the remaining budget to
/// stay spendable at rate c in the steps after it. Keeps every catalog
/// adversary budget-exact, which satisfies a cap and a floor alike.
fn forced_spend(ctx: &StepContext<'_>) -> f64 {
    let after = (ctx.steps_left() - 1) as f64 * ctx.constraint.c;
    (ctx.remaining_budget - after).clamp(0.0, ctx.constraint.c.min(ctx.remaining_budget.max(0.0)))
}

/// All built-in adversaries under their CLI names.
pub fn catalog() -> Vec<Box<dyn Adversary>> {
    vec![
        Box::new(IidBernoulli),
        Box::new(FrontLoaded),
        Box::new(BackLoaded),
        Box::new(ReactiveChaser::default()),
        Box::new(PointMassZero),
    ]
}

/// Looks up an adversary by catalog name. `reactive_chaser` accepts an
/// optional cold fraction: `reactive_chaser:0.25`.
pub fn by_name(name: &str) -> Option<Box<dyn Adversary>> {
    match name {
        "iid_bernoulli" => Some(Box::new(IidBernoulli)),
        "front_loaded" => Some(Box::new(FrontLoaded)),
        "back_loaded" => Some(Box::new(BackLoaded)),
        "reactive_chaser" => Some(Box::new(ReactiveChaser::default())),
        "point_mass_zero" => Some(Box::new(PointMassZero)),
        _ => {
            let rest = name.strip_prefix("reactive_chaser:")?;
            let cold_fraction: f64 = rest.parse().ok()?;
            if (0.0..=1.0).contains(&cold_fraction) {
                Some(Box::new(ReactiveChaser { cold_fraction }))
            } else {
                None
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Declarative phase schedules
// ---------------------------------------------------------------------------

/// One phase of a declarative adversary: a per-step rule applied for
/// `steps` steps (or for the rest of the trial when omitted).
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct PhaseSpec {
    pub steps: Option<usize>,
    pub rule: String,
}

/// A declarative adversary description, loadable from TOML:
///
/// ```toml
/// name = "burst_then_idle"
/// [[phases]]
/// steps = 1
/// rule = "spend_all"
/// [[phases]]
/// rule = "zero"
/// ```
///
/// Rules are the catalog's parameterized per-step families:
/// `zero`, `spend_all`, `pace`, `mean:<x>` (two-point mean x),
/// `chase:<cold_fraction>`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct ScheduleSpec {
    pub name: Option<String>,
    pub phases: Vec<PhaseSpec>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("schedule has no phases")]
    Empty,
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("rule '{0}' has an unparseable parameter")]
    BadParameter(String),
    #[error("failed to parse schedule: {0}")]
    Toml(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Zero,
    SpendAll,
    Pace,
    Mean(f64),
    Chase(f64),
}

fn parse_rule(text: &str) -> Result<Rule, ScheduleError> {
    match text {
        "zero" => return Ok(Rule::Zero),
        "spend_all" => return Ok(Rule::SpendAll),
        "pace" => return Ok(Rule::Pace),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("mean:") {
        let x: f64 = rest
            .parse()
            .map_err(|_| ScheduleError::BadParameter(text.into()))?;
        if !x.is_finite() || x < 0.0 {
            return Err(ScheduleError::BadParameter(text.into()));
        }
        return Ok(Rule::Mean(x));
    }
    if let Some(rest) = text.strip_prefix("chase:") {
        let f: f64 = rest
            .parse()
            .map_err(|_| ScheduleError::BadParameter(text.into()))?;
        if !(0.0..=1.0).contains(&f) {
            return Err(ScheduleError::BadParameter(text.into()));
        }
        return Ok(Rule::Chase(f));
    }
    Err(ScheduleError::UnknownRule(text.into()))
}

/// An adversary assembled from a [`ScheduleSpec`].
#[derive(Debug, Clone)]
pub struct ScheduleAdversary {
    name: String,
    rules: Vec<(Option<usize>, Rule)>,
}

impl ScheduleAdversary {
    pub fn from_spec(spec: &ScheduleSpec) -> Result<Self, ScheduleError> {
        if spec.phases.is_empty() {
            return Err(ScheduleError::Empty);
        }
        let mut rules = Vec::with_capacity(spec.phases.len());
        for phase in &spec.phases {
            rules.push((phase.steps, parse_rule(&phase.rule)?));
        }
        Ok(ScheduleAdversary {
            name: spec.name.clone().unwrap_or_else(|| "schedule".into()),
            rules,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ScheduleError> {
        let spec: ScheduleSpec =
            toml::from_str(text).map_err(|e| ScheduleError::Toml(e.to_string()))?;
        Self::from_spec(&spec)
    }

    fn rule_for(&self, step: usize) -> &Rule {
        let mut offset = 0usize;
        for (steps, rule) in &self.rules {
            match steps {
                Some(k) => {
                    if step < offset + k {
                        return rule;
                    }
                    offset += k;
                }
                None => return rule,
            }
        }
        // Past the last bounded phase: the final rule applies.
        &self.rules[self.rules.len() - 1].1
    }
}

impl Adversary for ScheduleAdversary {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        let r = ctx.remaining_budget.max(0.0);
        let cap = r.min(ctx.constraint.c);
        let spend = match self.rule_for(ctx.step) {
            Rule::Zero => 0.0,
            Rule::SpendAll => cap,
            Rule::Pace => r / ctx.steps_left() as f64,
            Rule::Mean(x) => x.min(cap),
            Rule::Chase(cold) => {
                let realized: f64 = ctx.history.iter().sum();
                let charged = ctx.constraint.mu - ctx.remaining_budget;
                let desired = if realized > charged {
                    cap
                } else {
                    cold * r / ctx.steps_left() as f64
                };
                desired.clamp(forced_spend(ctx), cap)
            }
        };
        IncrementDistribution::two_point_mean(ctx.constraint.c, spend)
    }
}
