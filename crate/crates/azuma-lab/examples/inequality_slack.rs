//! Dense grid verification of the two scalar log inequalities.
//!
//! The sharp exponents never exceed the simple ones:
//!   upper: delta - (1 + delta) ln(1 + delta) <= -delta^2 / (2 + delta)
//!   lower: -delta - (1 - delta) ln(1 - delta) <= -delta^2 / 2
//! Slack here is lhs - rhs, so every point must be nonpositive; it tends to
//! zero as delta -> 0 where both sides vanish to second order.

use azuma_lab::bounds::{check_log_inequalities, InequalityFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let upper_grid: Vec<f64> = (1..=1000).map(|i| i as f64 * 0.01).collect();
    let lower_grid: Vec<f64> = (0..=999).map(|i| i as f64 * 0.001).collect();

    for (family, grid) in [
        (InequalityFamily::Upper, upper_grid),
        (InequalityFamily::Lower, lower_grid),
    ] {
        let points = check_log_inequalities(family, &grid)?;
        let violations = points.iter().filter(|p| !p.holds).count();
        let widest = points
            .iter()
            .min_by(|a, b| a.slack.total_cmp(&b.slack))
            .unwrap();
        let tightest = points
            .iter()
            .max_by(|a, b| a.slack.total_cmp(&b.slack))
            .unwrap();
        println!(
            "{}: {} grid points, {} violations",
            family.as_str(),
            points.len(),
            violations
        );
        println!(
            "  tightest slack {:.6e} at delta = {}",
            tightest.slack, tightest.delta
        );
        println!(
            "  widest   slack {:.6e} at delta = {}",
            widest.slack, widest.delta
        );
        assert_eq!(violations, 0);
    }

    Ok(())
}
