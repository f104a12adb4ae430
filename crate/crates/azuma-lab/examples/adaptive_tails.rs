//! Monte Carlo upper tails for every built-in adversary versus the bounds.
//!
//! Each adversary spends a mean budget of mu across n steps, choosing its
//! per-step distribution adaptively from the realized history. The estimated
//! tail (with a Clopper-Pearson interval) must sit below both the simple and
//! the sharp bound; the verdict column flags any interval that does not.

use azuma_lab::adversary::{catalog, estimate_tail, verify_bound, BudgetConstraint, TailDirection};
use azuma_lab::bounds::{mult_azuma_upper, mult_azuma_upper_sharp, BoundQuery};
use azuma_lab::DEFAULT_SEED;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 48;
    let mu = 6.0;
    let c = 1.0;
    let trials = 40_000;
    let confidence = 0.99;

    for &delta in &[0.5, 1.0] {
        let q = BoundQuery::new(mu, c, delta)?;
        let simple = mult_azuma_upper(&q)?;
        let sharp = mult_azuma_upper_sharp(&q)?;
        let constraint = BudgetConstraint::new(c, mu, n, TailDirection::Upper)?;
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
