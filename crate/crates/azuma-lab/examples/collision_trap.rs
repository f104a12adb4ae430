//! The conditional-probability trap in the recycling game.
//!
//! A strategy stacks balls 3..=P into one bin, removes ball 2, then tosses
//! ball 1 and asks: given the stack was achieved, what is the chance the
//! probe ball joins it? Treating the P - 2 stacked landings as if they were
//! still independent after conditioning suggests P^-(P-2); the correct
//! answer is 1/P, because the bin choice of the probe toss is independent
//! of the past. The experiment measures the conditional frequency both by
//! waiting for the collision and by constructing the post-collision state.

use azuma_lab::recycling::counterexample_experiment;
use azuma_lab::DEFAULT_SEED;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let confidence = 0.99;

    println!("waiting mode, P = 4");
    let report = counterexample_experiment(4, 20_000, DEFAULT_SEED, 64, false, confidence)?;
    println!(
        "  collisions = {} of {} trials (no-collision fraction {:.2e})",
        report.collisions, report.trials, report.no_collision_fraction
    );
    print_verdict(&report);

    for p in [4, 6, 8] {
        println!("constructed mode, P = {p}");
        let report = counterexample_experiment(p, 50_000, DEFAULT_SEED, 1, true, confidence)?;
        print_verdict(&report);
    }

    Ok(())
}

fn print_verdict(report: &azuma_lab::recycling::CounterexampleReport) {
    println!(
        "  estimate = {:.5} in [{:.5}, {:.5}], corrected 1/P = {:.5}, claimed P^-(P-2) = {:.3e}",
        report.estimate.point,
        report.estimate.ci_lower,
        report.estimate.ci_upper,
        report.corrected,
        report.claimed
    );
    println!(
        "  interval {} the claimed value",
        if report.falsified {
            "excludes"
        } else {
            "does not exclude"
        }
    );
}
