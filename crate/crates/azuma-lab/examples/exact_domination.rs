//! Exact tail probabilities versus the closed-form bounds.
//!
//! For short trials every adversary in the catalog has a finitely supported
//! sum, so its tail probability can be computed exactly in rational
//! arithmetic by enumerating the trajectory tree. The margin columns show
//! how much slack each bound leaves; both must be nonnegative everywhere.

use azuma_lab::adversary::{catalog, BudgetConstraint, TailDirection};
use azuma_lab::bounds::{mult_azuma_upper, mult_azuma_upper_sharp, BoundQuery};
use azuma_lab::oracle::{exact_tail, DEFAULT_PATH_CAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    let mu = 3.0;
    let c = 1.0;
    let constraint = BudgetConstraint::new(c, mu, n, TailDirection::Upper)?;

    println!("n = {n}, mu = {mu}, c = {c}");
    println!(
        "{:>16} {:>6} {:>7} {:>13} {:>13} {:>13}",
        "adversary", "delta", "paths", "exact", "simple_margin", "sharp_margin"
    );
    for adversary in catalog() {
        for &delta in &[0.25, 0.5, 1.0, 1.5] {
            let q = BoundQuery::new(mu, c, delta)?;
            let simple = mult_azuma_upper(&q)?;
            let sharp = mult_azuma_upper_sharp(&q)?;
            let report = exact_tail(adversary.as_ref(), &constraint, delta, DEFAULT_PATH_CAP)?;
            let exact = report.probability_f64;
            assert!(simple.value >= exact && sharp.value >= exact);
            println!(
                "{:>16} {:>6} {:>7} {:>13.6e} {:>13.6e} {:>13.6e}",
                adversary.name(),
                delta,
                report.paths,
                exact,
                simple.value - exact,
                sharp.value - exact
            );
        }
    }

    Ok(())
}
