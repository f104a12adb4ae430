//! Verification toolkit for multiplicative tail bounds on bounded-increment
//! processes, adversarial budget-constrained simulation, and the
//! (P,M)-recycling game from randomized work stealing.
//!
//! The crate has three layers:
//!
//! * closed-form bound evaluators ([`bounds`]), all computed in log space so
//!   budgets up to 1e12 never overflow or underflow through `exp`;
//! * randomized engines ([`adversary`], [`recycling`]) that pit adaptive
//!   adversaries and toss strategies against those bounds, with bit-exact
//!   seeded reproducibility ([`seeding`]) and Clopper-Pearson interval
//!   estimates ([`stats`]);
//! * an exact enumeration oracle ([`oracle`]) that computes tail
//!   probabilities and small-game delay distributions in exact rational
//!   arithmetic, so a bound violation can never be blamed on rounding.
//!
//! The `azuma-lab` binary exposes the whole toolkit as subcommands
//! (`bound`, `simulate`, `recycle`, `counterexample`, `verify`); the
//! `examples/` directory holds one runnable walkthrough per capability:
//!
//! * `bound_curves` - every bound family swept over a delta grid
//! * `adaptive_tails` - catalog adversaries vs. the upper-tail bound
//! * `lower_tails` - floor-budget adversaries vs. the lower-tail bound
//! * `exact_domination` - exact enumeration vs. bounds on small instances
//! * `mgf_check` - the moment-generating-function envelope vs. exact MGFs
//! * `recycling_games` - delay-tail experiments for the recycling game
//! * `collision_trap` - the collision strategy that breaks a naive
//!   independence analysis of the game
//! * `inequality_slack` - slack curves for the two scalar log inequalities
//! * `custom_adversary` - declarative phase-schedule adversaries
//! * `parallel_repro` - thread-count-independent reproducibility
//!
//! Run one with `cargo run -p azuma-lab --example bound_curves`.

pub mod adversary;
pub mod bounds;
pub mod cli;
pub mod oracle;
pub mod recycling;
pub mod report;
pub mod seeding;
pub mod stats;

/// Default master seed used by the CLI and examples when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_A2A7;
