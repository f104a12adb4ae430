//! Two ways to add an adversary: implement the trait, or load a schedule.
//!
//! The hand-written Sleeper idles through the first half of the trial and
//! then spends as fast as the cap allows, concentrating all randomness in
//! the closing steps. The TOML schedule builds a burst-then-pace plan from
//! the declarative rule language. Both stay below the sharp bound.

use azuma_lab::adversary::{
    estimate_tail, verify_bound, Adversary, BudgetConstraint, IncrementDistribution,
    ScheduleAdversary, StepContext, TailDirection,
};
use azuma_lab::bounds::{mult_azuma_upper_sharp, BoundQuery};
use azuma_lab::DEFAULT_SEED;

/// Spends nothing until half the steps are gone, then spends at the cap.
struct Sleeper;

impl Adversary for Sleeper {
    fn name(&self) -> String {
        "sleeper".into()
    }

    fn choose(&self, ctx: &StepContext<'_>) -> IncrementDistribution {
        if ctx.step < ctx.constraint.n / 2 {
            return IncrementDistribution::point_mass(0.0);
        }
        let pace = ctx.remaining_budget.max(0.0) / ctx.steps_left() as f64;
        IncrementDistribution::two_point_mean(ctx.constraint.c, pace.min(ctx.constraint.c))
    }
}

const SCHEDULE: &str = r#"
name = "burst_then_pace"

[[phases]]
steps = 2
rule = "spend_all"

[[phases]]
rule = "pace"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 32;
    let mu = 4.0;
    let c = 1.0;
    let delta = 0.75;
    let trials = 50_000;

    let constraint = BudgetConstraint::new(c, mu, n, TailDirection::Upper)?;
    let sharp = mult_azuma_upper_sharp(&BoundQuery::new(mu, c, delta)?)?;
    println!(
        "n = {n}, mu = {mu}, delta = {delta}, sharp bound = {:.6e}",
        sharp.value
    );

    let schedule = ScheduleAdversary::from_toml(SCHEDULE)?;
    let adversaries: Vec<Box<dyn Adversary>> = vec![Box::new(Sleeper), Box::new(schedule)];
    for adversary in &adversaries {
        let est = estimate_tail(
            adversary.as_ref(),
            &constraint,
            delta,
            trials,
            DEFAULT_SEED,
            0.99,
        )?;
        let verdict = verify_bound(&est, sharp.value);
        println!(
            "{:>16}: point = {:.6}, ci = [{:.6}, {:.6}], {}",
            adversary.name(),
            est.point,
            est.ci_lower,
            est.ci_upper,
            verdict.as_str()
        );
    }

    Ok(())
}
