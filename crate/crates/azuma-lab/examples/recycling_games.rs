//! Delay statistics for every built-in recycling strategy.
//!
//! Each strategy plays the same (P, M) game on its own deterministic seed
//! stream. The report compares the total-delay tail against the
//! 3M + 2P ln(1/eps) threshold and two direct per-delta checks; pass means
//! every interval is consistent with the bound.

use azuma_lab::recycling::{builtin_strategies, delay_tail_experiment, GameConfig};
use azuma_lab::DEFAULT_SEED;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = GameConfig::new(8, 128)?;
    let trials = 2_000;
    let eps = 0.05;
    let confidence = 0.99;

    println!("P = 8, M = 128, trials = {trials}, eps = {eps}");
    println!(
        "{:>20} {:>11} {:>9} {:>12} {:>10} {:>6}",
        "strategy", "mean_delay", "max", "threshold", "tail_ci_up", "pass"
    );
    for spec in builtin_strategies() {
        let report = delay_tail_experiment(config, &spec, eps, trials, DEFAULT_SEED, confidence)?;
        println!(
            "{:>20} {:>11.3} {:>9} {:>12.2} {:>10.6} {:>6}",
            report.strategy,
            report.mean_delay,
            report.max_delay,
            report.threshold_bound.threshold,
            report.threshold_estimate.ci_upper,
            report.pass
        );
    }

    Ok(())
}
