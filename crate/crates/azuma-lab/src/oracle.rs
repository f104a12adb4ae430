//! Exact enumeration oracles.
//!
//! Every finite f64 is a dyadic rational, so adversary supports and
//! probabilities convert to `BigRational` without loss and whole decision
//! trees can be summed exactly. The oracles walk the full tree (adversary
//! step distributions, or game bin assignments), feeding each realized
//! prefix back to the adversary or strategy exactly as the simulation
//! engine would, and accumulate outcome probabilities in rational
//! arithmetic. Tail probabilities computed here have no sampling error and
//! no rounding error, which is what the Monte Carlo layer is validated
//! against.
//!
//! Legality (support range, budget cap and floor) is enforced with the same
//! f64 comparisons as the engine, so the two layers accept exactly the same
//! adversaries; only the probability accounting is rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adversary::{
    Adversary, BudgetConstraint, EngineError, IncrementDistribution, StepContext, TailDirection,
    BUDGET_REL_TOL,
};
use crate::recycling::{GameConfig, GameError, GameState, StrategySpec};

/// Default ceiling on enumerated root-to-leaf paths.
pub const DEFAULT_PATH_CAP: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("path budget exceeded: enumeration needs more than {cap} paths")]
    PathBudgetExceeded { cap: u64 },
    #[error("enumerated probabilities sum to {total}, further than 1e-9 from 1")]
    IncompleteDistribution { total: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Exact conversion of a finite f64 to the rational it denotes.
///
/// Panics on NaN or infinity; oracle inputs are validated before they get
/// here.
pub fn dyadic(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite f64 required")
}

/// Correctly rounded f64 value of a rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact distribution of the final sum of an adversary-driven process.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    /// Final sum (exact value of the f64 left-fold's ideal real sum) to its
    /// probability. Probabilities need not total exactly 1: each step's f64
    /// support probabilities may miss 1 by up to 1e-12.
    pub outcomes: BTreeMap<BigRational, BigRational>,
    /// Root-to-leaf paths enumerated.
    pub paths: u64,
}

impl ExactDistribution {
    pub fn total_probability(&self) -> BigRational {
        self.outcomes.values().sum()
    }

    /// Unnormalized mean sum over all outcomes.
    pub fn mean(&self) -> BigRational {
        self.outcomes.iter().map(|(v, p)| v * p).sum()
    }

    /// Exact Pr[sum >= threshold], the threshold compared as the rational
    /// the f64 denotes.
    pub fn tail_at_least(&self, threshold: f64) -> BigRational {
        let t = dyadic(threshold);
        self.outcomes
            .iter()
            .filter(|(v, _)| **v >= t)
            .map(|(_, p)| p)
            .sum()
    }

    /// Exact Pr[sum <= threshold].
    pub fn tail_at_most(&self, threshold: f64) -> BigRational {
        let t = dyadic(threshold);
        self.outcomes
            .iter()
            .filter(|(v, _)| **v <= t)
            .map(|(_, p)| p)
            .sum()
    }

    /// The tail event the direction's bounds speak about: sum >= threshold
    /// for upper constraints, sum <= threshold for lower.
    pub fn tail(&self, direction: TailDirection, threshold: f64) -> BigRational {
        match direction {
            TailDirection::Upper => self.tail_at_least(threshold),
            TailDirection::Lower => self.tail_at_most(threshold),
        }
    }
}

/// Enumerates every trajectory of `adversary` against `constraint` and
/// returns the exact distribution of the final sum.
///
/// The adversary sees the same contexts as in simulation: realized f64
/// prefix, f64 remaining budget (mu minus a left fold of charged means),
/// and the step index. Zero-probability support entries are skipped; they
/// cannot be sampled and would only burn path budget.
pub fn exact_sum_distribution(
    adversary: &dyn Adversary,
    constraint: &BudgetConstraint,
    cap: u64,
) -> Result<ExactDistribution, OracleError> {
    constraint.validate().map_err(OracleError::Engine)?;
    let mut outcomes = BTreeMap::new();
    let mut paths = 0u64;
    let mut increments = Vec::with_capacity(constraint.n);
    expand_sums(
        adversary,
        constraint,
        cap,
        &mut increments,
        &BigRational::zero(),
        0.0,
        &BigRational::one(),
        0,
        &mut outcomes,
        &mut paths,
    )?;
    let dist = ExactDistribution { outcomes, paths };
    let total = rational_to_f64(&dist.total_probability());
    if (dist.total_probability() - BigRational::one()).abs() > dyadic(1e-9) {
        return Err(OracleError::IncompleteDistribution { total });
    }
    Ok(dist)
}

#[allow(clippy::too_many_arguments)]
fn expand_sums(
    adversary: &dyn Adversary,
    constraint: &BudgetConstraint,
    cap: u64,
    increments: &mut Vec<f64>,
    sum: &BigRational,
    budget_used: f64,
    prob: &BigRational,
    step: usize,
    outcomes: &mut BTreeMap<BigRational, BigRational>,
    paths: &mut u64,
) -> Result<(), OracleError> {
    if step == constraint.n {
        if constraint.direction == TailDirection::Lower
            && budget_used < constraint.mu * (1.0 - BUDGET_REL_TOL)
        {
            return Err(EngineError::FloorViolation {
                spent: budget_used,
                mu: constraint.mu,
            }
            .into());
        }
        *paths += 1;
        if *paths > cap {
            return Err(OracleError::PathBudgetExceeded { cap });
        }
        *outcomes
            .entry(sum.clone())
            .or_insert_with(BigRational::zero) += prob.clone();
        return Ok(());
    }

    let ctx = StepContext {
        history: increments,
        remaining_budget: constraint.mu - budget_used,
        step,
        constraint,
    };
    let dist = adversary.choose(&ctx);
    dist.validate(step).map_err(OracleError::Engine)?;
    for &(value, _) in &dist.support {
        if value < 0.0 || value > constraint.c {
            return Err(EngineError::SupportViolation {
                step,
                value,
                c: constraint.c,
            }
            .into());
        }
    }
    let mean = dist.mean();
    let spent = budget_used + mean;
    if constraint.direction == TailDirection::Upper
        && spent > constraint.mu * (1.0 + BUDGET_REL_TOL)
    {
        return Err(EngineError::BudgetViolation {
            step,
            spent,
            mu: constraint.mu,
        }
        .into());
    }

    for &(value, p) in &dist.support {
        if p == 0.0 {
            continue;
        }
        increments.push(value);
        let next_sum = sum + dyadic(value);
        let next_prob = prob * dyadic(p);
        let result = expand_sums(
            adversary,
            constraint,
            cap,
            increments,
            &next_sum,
            spent,
            &next_prob,
            step + 1,
            outcomes,
            paths,
        );
        increments.pop();
        result?;
    }
    Ok(())
}

/// An exact tail probability with the context needed to compare it to a
/// bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTailReport {
    pub threshold: f64,
    pub probability: BigRational,
    pub probability_f64: f64,
    pub paths: u64,
}

/// Exact probability of the tail event at offset `delta` (see
/// [`BudgetConstraint::threshold`]).
pub fn exact_tail(
    adversary: &dyn Adversary,
    constraint: &BudgetConstraint,
    delta: f64,
    cap: u64,
) -> Result<ExactTailReport, OracleError> {
    let dist = exact_sum_distribution(adversary, constraint, cap)?;
    let threshold = constraint.threshold(delta);
    let probability = dist.tail(constraint.direction, threshold);
    Ok(ExactTailReport {
        threshold,
        probability_f64: rational_to_f64(&probability),
        probability,
        paths: dist.paths,
    })
}

/// E[exp(t (X - E X))] for a finite-support increment distribution, with
/// the mean charged exactly as the engine charges it. Plain f64 arithmetic;
/// the exactness of this module is not claimed for the exponential.
pub fn centered_mgf(dist: &IncrementDistribution, t: f64) -> f64 {
    let mean = dist.mean();
    dist.support
        .iter()
        .fold(0.0, |acc, &(v, p)| acc + p * (t * (v - mean)).exp())
}

/// Exact distribution of the total delay of a recycling game.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGameDistribution {
    pub delays: BTreeMap<u64, BigRational>,
    pub paths: u64,
}

impl ExactGameDistribution {
    pub fn total_probability(&self) -> BigRational {
        self.delays.values().sum()
    }

    pub fn mean(&self) -> BigRational {
        self.delays
            .iter()
            .map(|(&d, p)| BigRational::from_integer(BigInt::from(d)) * p)
            .sum()
    }

    pub fn tail_at_least(&self, threshold: u64) -> BigRational {
        self.delays
            .iter()
            .filter(|(&d, _)| d >= threshold)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Enumerates every bin assignment of a recycling game under `spec` and
/// returns the exact total-delay distribution. Needs P^M <= cap.
///
/// Strategy coin flips are not branched over: each branch hands the
/// strategy a clone of one fixed ChaCha8 stream seeded with `seed`, so for
/// strategies that consult the RNG the result is the delay distribution
/// conditional on that coin sequence. Deterministic strategies (eager,
/// single_file, counterexample) are unaffected.
pub fn exact_game(
    config: GameConfig,
    spec: &StrategySpec,
    seed: u64,
    cap: u64,
) -> Result<ExactGameDistribution, OracleError> {
    let mut assignments: u128 = 1;
    for _ in 0..config.m {
        assignments = assignments.saturating_mul(config.p as u128);
        if assignments > cap as u128 {
            return Err(OracleError::PathBudgetExceeded { cap });
        }
    }

    let stall_cap = 10 * (config.m + config.p as u64);
    let mut delays = BTreeMap::new();
    let mut paths = 0u64;
    let state = GameState::new(config);
    let strategy = spec.build();
    let rng = ChaCha8Rng::seed_from_u64(seed);
    expand_game(
        state,
        strategy,
        rng,
        BigRational::one(),
        stall_cap,
        cap,
        &mut delays,
        &mut paths,
    )?;
    let dist = ExactGameDistribution { delays, paths };
    let total = rational_to_f64(&dist.total_probability());
    if (dist.total_probability() - BigRational::one()).abs() > dyadic(1e-9) {
        return Err(OracleError::IncompleteDistribution { total });
    }
    Ok(dist)
}

#[allow(clippy::too_many_arguments)]
fn expand_game(
    state: GameState,
    mut strategy: Box<dyn crate::recycling::Strategy>,
    mut rng: ChaCha8Rng,
    prob: BigRational,
    stall_cap: u64,
    cap: u64,
    delays: &mut BTreeMap<u64, BigRational>,
    paths: &mut u64,
) -> Result<(), OracleError> {
    if state.finished() {
        *paths += 1;
        if *paths > cap {
            return Err(OracleError::PathBudgetExceeded { cap });
        }
        *delays
            .entry(state.total_delay())
            .or_insert_with(BigRational::zero) += prob;
        return Ok(());
    }
    if state.step_count() >= stall_cap {
        return Err(GameError::StrategyStalled {
            steps: state.step_count(),
        }
        .into());
    }

    let toss = strategy.choose_toss(&state, &mut rng);
    let mut balls = toss.balls;
    balls.sort_unstable();
    for pair in balls.windows(2) {
        if pair[0] == pair[1] {
            return Err(GameError::DuplicateToss {
                step: state.step_count(),
                ball: pair[0],
            }
            .into());
        }
    }

    let p = state.config().p;
    let k = balls.len();
    let mut branch_weight = BigInt::one();
    for _ in 0..k {
        branch_weight *= BigInt::from(p);
    }
    let branch_prob = &prob / BigRational::from_integer(branch_weight);

    // Odometer over bin assignments: digits[i] is ball balls[i]'s bin.
    let mut digits = vec![1u32; k];
    'assignments: loop {
        let mut st = state.clone();
        let mut strat = strategy.clone_box();
        let mut branch_rng = rng.clone();
        for (i, &ball) in balls.iter().enumerate() {
            st.place_ball(ball, digits[i])?;
        }
        let removals = strat.choose_removals(&st, &mut branch_rng);
        st.removal_phase(&removals)?;
        expand_game(
            st,
            strat,
            branch_rng,
            branch_prob.clone(),
            stall_cap,
            cap,
            delays,
            paths,
        )?;

        let mut i = 0;
        loop {
            if i == k {
                break 'assignments;
            }
            digits[i] += 1;
            if digits[i] <= p {
                break;
            }
            digits[i] = 1;
            i += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{estimate_tail, FrontLoaded, IidBernoulli, ReactiveChaser};

    fn upper(c: f64, mu: f64, n: usize) -> BudgetConstraint {
        BudgetConstraint::new(c, mu, n, TailDirection::Upper).unwrap()
    }

    fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn bernoulli_four_steps_is_exactly_five_sixteenths() {
        // Four fair coin steps: Pr[sum >= 3] = (4 + 1) / 16.
        let k = upper(1.0, 2.0, 4);
        let dist = exact_sum_distribution(&IidBernoulli, &k, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 16);
        assert_eq!(dist.total_probability(), BigRational::one());
        assert_eq!(dist.tail_at_least(3.0), ratio(5, 16));
        assert_eq!(dist.mean(), ratio(2, 1));
    }

    #[test]
    fn binomial_twenty_matches_reference_tail() {
        // Bin(20, 0.1): per-step mean is the f64 nearest 1/10, so the exact
        // rational answer sits within 1e-12 of the ideal 0.13295332343433508.
        let k = upper(1.0, 2.0, 20);
        let dist = exact_sum_distribution(&IidBernoulli, &k, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 1 << 20);
        let tail = rational_to_f64(&dist.tail_at_least(4.0));
        let reference = 0.13295332343433508;
        assert!(
            ((tail - reference) / reference).abs() < 1e-12,
            "tail = {tail}"
        );
    }

    #[test]
    fn front_loaded_burst_tail_is_exactly_half() {
        // mu = c/2 on one opening burst: Pr[sum >= c] = 1/2 exactly.
        let k = upper(1.0, 0.5, 3);
        let report = exact_tail(&FrontLoaded, &k, 1.0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(report.threshold, 1.0);
        assert_eq!(report.probability, ratio(1, 2));
    }

    #[test]
    fn monte_carlo_interval_covers_the_exact_tail() {
        let k = upper(1.0, 2.5, 5);
        let delta = 0.5;
        let adversary = ReactiveChaser::default();
        let exact = exact_tail(&adversary, &k, delta, DEFAULT_PATH_CAP).unwrap();
        let est = estimate_tail(&adversary, &k, delta, 100_000, 21, 0.99).unwrap();
        assert!(
            est.ci_lower <= exact.probability_f64 && exact.probability_f64 <= est.ci_upper,
            "exact {} vs interval [{}, {}]",
            exact.probability_f64,
            est.ci_lower,
            est.ci_upper
        );
    }

    #[test]
    fn path_cap_is_enforced() {
        let k = upper(1.0, 15.0, 30);
        let err = exact_sum_distribution(&IidBernoulli, &k, 100_000).unwrap_err();
        assert_eq!(err, OracleError::PathBudgetExceeded { cap: 100_000 });
    }

    #[test]
    fn zero_probability_branches_are_skipped() {
        struct Degenerate;
        impl Adversary for Degenerate {
            fn name(&self) -> String {
                "degenerate".into()
            }
            fn choose(&self, _: &StepContext<'_>) -> IncrementDistribution {
                IncrementDistribution {
                    support: vec![(0.0, 1.0), (0.7, 0.0)],
                }
            }
        }
        let k = upper(1.0, 1.0, 6);
        let dist = exact_sum_distribution(&Degenerate, &k, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 1);
        assert_eq!(dist.total_probability(), BigRational::one());
    }

    #[test]
    fn oracle_enforces_engine_legality() {
        struct Hoarder;
        impl Adversary for Hoarder {
            fn name(&self) -> String {
                "hoarder".into()
            }
            fn choose(&self, _: &StepContext<'_>) -> IncrementDistribution {
                IncrementDistribution::point_mass(0.0)
            }
        }
        let floor = BudgetConstraint::new(1.0, 2.0, 4, TailDirection::Lower).unwrap();
        assert!(matches!(
            exact_sum_distribution(&Hoarder, &floor, DEFAULT_PATH_CAP),
            Err(OracleError::Engine(EngineError::FloorViolation { .. }))
        ));

        struct OutOfRange;
        impl Adversary for OutOfRange {
            fn name(&self) -> String {
                "out_of_range".into()
            }
            fn choose(&self, _: &StepContext<'_>) -> IncrementDistribution {
                IncrementDistribution::point_mass(1.5)
            }
        }
        let k = upper(1.0, 4.0, 4);
        assert!(matches!(
            exact_sum_distribution(&OutOfRange, &k, DEFAULT_PATH_CAP),
            Err(OracleError::Engine(EngineError::SupportViolation { .. }))
        ));
    }

    #[test]
    fn two_ball_game_distribution_is_exact() {
        let config = GameConfig::new(2, 2).unwrap();
        let dist = exact_game(config, &StrategySpec::Eager, 0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 4);
        assert_eq!(dist.total_probability(), BigRational::one());
        assert_eq!(dist.delays.len(), 2);
        assert_eq!(dist.delays[&0], ratio(1, 2));
        assert_eq!(dist.delays[&1], ratio(1, 2));
    }

    #[test]
    fn three_ball_game_distribution_is_exact() {
        // One eager burst of 3 balls into 3 bins: all distinct (6/27) gives
        // D=0, one pair (18/27) gives D=1, triple (3/27) gives D=3.
        let config = GameConfig::new(3, 3).unwrap();
        let dist = exact_game(config, &StrategySpec::Eager, 0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 27);
        assert_eq!(dist.total_probability(), BigRational::one());
        assert_eq!(dist.delays[&0], ratio(2, 9));
        assert_eq!(dist.delays[&1], ratio(2, 3));
        assert_eq!(dist.delays[&3], ratio(1, 9));
        assert_eq!(dist.mean(), ratio(1, 1));
        assert_eq!(dist.tail_at_least(1), ratio(7, 9));
    }

    #[test]
    fn single_file_never_accumulates_delay() {
        let config = GameConfig::new(3, 2).unwrap();
        let dist = exact_game(config, &StrategySpec::SingleFile, 0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(dist.paths, 9);
        assert_eq!(dist.delays.len(), 1);
        assert_eq!(dist.delays[&0], BigRational::one());
    }

    #[test]
    fn game_path_cap_is_checked_up_front() {
        let config = GameConfig::new(4, 16).unwrap();
        let err = exact_game(config, &StrategySpec::Eager, 0, 1000).unwrap_err();
        assert_eq!(err, OracleError::PathBudgetExceeded { cap: 1000 });
    }

    #[test]
    fn mgf_hierarchy_three_point_below_two_point_below_envelope() {
        use crate::bounds::mgf_bound;
        let c = 1.0;
        for s in [0.1, 0.3, 0.5, 0.7] {
            let three = IncrementDistribution::three_point_mean(c, s);
            let two = IncrementDistribution::two_point_mean(c, s);
            for t in [-2.0, -0.5, 0.5, 2.0] {
                let m3 = centered_mgf(&three, t);
                let m2 = centered_mgf(&two, t);
                let a = two.mean();
                let envelope = mgf_bound(t, a, c - a).unwrap();
                assert!(m3 <= m2 * (1.0 + 1e-12), "s={s} t={t}: {m3} vs {m2}");
                assert!(
                    m2 <= envelope * (1.0 + 1e-12),
                    "s={s} t={t}: {m2} vs {envelope}"
                );
            }
        }
    }

    #[test]
    fn dyadic_conversion_is_exact() {
        assert_eq!(dyadic(0.5), ratio(1, 2));
        assert_eq!(dyadic(0.1), ratio(3602879701896397, 1) / ratio(1 << 55, 1));
        assert_eq!(rational_to_f64(&dyadic(0.1)), 0.1);
    }
}
