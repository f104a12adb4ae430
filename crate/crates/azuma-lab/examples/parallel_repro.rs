//! Thread-count independence of the parallel drivers.
//!
//! Every trial draws from a ChaCha8 stream derived from (master seed, trial
//! index), so the work can be scheduled on any number of threads without
//! changing a single result. This runs the same experiments on one thread
//! and on eight and asserts the outputs are equal.

use azuma_lab::adversary::{by_name, estimate_tail, BudgetConstraint, TailDirection};
use azuma_lab::recycling::{run_games, GameConfig, StrategySpec};
use azuma_lab::seeding::trial_seed;
use azuma_lab::DEFAULT_SEED;

fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    println!("trial seed stream from master {DEFAULT_SEED}:");
    for k in 0..4 {
        println!("  trial {k} -> {}", trial_seed(DEFAULT_SEED, k));
    }

    let adversary = by_name("reactive_chaser").unwrap();
    let constraint = BudgetConstraint::new(1.0, 4.0, 32, TailDirection::Upper)?;
    let config = GameConfig::new(8, 64)?;
    let spec = StrategySpec::parse("eager").unwrap();

    let mut tails = Vec::new();
    let mut games = Vec::new();
    for threads in [1, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        let (tail, summary) = pool.install(|| {
            let tail = estimate_tail(
                adversary.as_ref(),
                &constraint,
                0.5,
                20_000,
                DEFAULT_SEED,
                0.99,
            )?;
            let summary = run_games(config, &spec, 2_000, DEFAULT_SEED)?;
            Ok::<_, Box<dyn std::error::Error + Send + Sync>>((tail, summary))
        })?;
        println!(
            "threads = {threads}: tail point = {:.6}, games total delay sum = {}",
            tail.point,
            summary.iter().map(|s| s.total_delay).sum::<u64>()
        );
        tails.push(tail);
        games.push(summary);
    }

    assert_eq!(tails[0], tails[1], "tail estimate depends on thread count");
    assert_eq!(games[0], games[1], "game results depend on thread count");
    println!("one thread and eight threads agree exactly");

    Ok(())
}
