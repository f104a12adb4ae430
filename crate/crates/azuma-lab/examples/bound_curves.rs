//! Tabulates the multiplicative tail bounds over a delta sweep.
//!
//! For a fixed budget mu and step cap c, this prints the simple and sharp
//! upper bounds side by side, plus the lower-tail pair where it is defined
//! (delta < 1). The sharp forms are never larger, and the gap widens as
//! delta grows.

use azuma_lab::bounds::{
    mult_azuma_lower, mult_azuma_lower_sharp, mult_azuma_upper, mult_azuma_upper_sharp, BoundQuery,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = 20.0;
    let c = 1.0;

    println!("upper tail, mu = {mu}, c = {c}");
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "delta", "simple", "sharp", "ratio"
    );
    for &delta in &[0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let q = BoundQuery::new(mu, c, delta)?;
        let simple = mult_azuma_upper(&q)?;
        let sharp = mult_azuma_upper_sharp(&q)?;
        println!(
            "{:>8} {:>14.6e} {:>14.6e} {:>10.4}",
            delta,
            simple.value,
            sharp.value,
            sharp.value / simple.value
        );
    }

    println!();
    println!("lower tail, mu = {mu}, c = {c}");
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "delta", "simple", "sharp", "ratio"
    );
    for &delta in &[0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
        let q = BoundQuery::new(mu, c, delta)?;
        let simple = mult_azuma_lower(&q)?;
        let sharp = mult_azuma_lower_sharp(&q)?;
        println!(
            "{:>8} {:>14.6e} {:>14.6e} {:>10.4}",
            delta,
            simple.value,
            sharp.value,
            sharp.value / simple.value
        );
    }

    Ok(())
}
