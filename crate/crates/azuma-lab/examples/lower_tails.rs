//! Lower-tail estimation under the spending floor.
//!
//! In the lower-tail game the adversary must spend the whole budget by the
//! end of the trial (the engine rejects underspending), and the event of
//! interest is the sum falling to (1 - delta) mu or below. point_mass_zero
//! is excluded: an adversary that never spends cannot meet the floor.

use azuma_lab::adversary::{catalog, estimate_tail, verify_bound, BudgetConstraint, TailDirection};
use azuma_lab::bounds::{mult_azuma_lower, mult_azuma_lower_sharp, BoundQuery};
use azuma_lab::DEFAULT_SEED;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 40;
    let mu = 5.0;
    let c = 1.0;
    let trials = 40_000;
    let confidence = 0.99;

    for &delta in &[0.25, 0.5, 0.75] {
        let q = BoundQuery::new(mu, c, delta)?;
        let simple = mult_azuma_lower(&q)?;
        let sharp = mult_azuma_lower_sharp(&q)?;
        let constraint = BudgetConstraint::new(c, mu, n, TailDirection::Lower)?;
        println!(
            "delta = {delta}, threshold = {}, simple = {:.4e}, sharp = {:.4e}",
            constraint.threshold(delta),
            simple.value,
            sharp.value
        );
        println!(
            "{:>16} {:>7} {:>12} {:>12} {:>8}",
            "adversary", "hits", "point", "ci_upper", "verdict"
        );
        for adversary in catalog() {
            if adversary.name() == "point_mass_zero" {
                continue;
            }
            let est = estimate_tail(
                adversary.as_ref(),
                &constraint,
                delta,
                trials,
                DEFAULT_SEED,
                confidence,
            )?;
            let verdict = verify_bound(&est, sharp.value);
            println!(
                "{:>16} {:>7} {:>12.6} {:>12.6} {:>8}",
                adversary.name(),
                est.hits,
                est.point,
                est.ci_upper,
                verdict.as_str()
            );
        }
        println!();
    }

    Ok(())
}
