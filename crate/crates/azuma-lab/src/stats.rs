//! Interval estimates for Monte Carlo runs.
//!
//! Tail probabilities are Bernoulli means, so they get exact Clopper-Pearson
//! intervals: for h hits in n trials at confidence 1-alpha,
//!
//! ```text
//! lower = BetaInv(alpha/2;     h,     n - h + 1)    (0 when h = 0)
//! upper = BetaInv(1 - alpha/2; h + 1, n - h)        (1 when h = n)
//! ```
//!
//! Bounded non-Bernoulli observations (per-toss delays) get a Hoeffding
//! interval: half-width = range * sqrt(ln(2/alpha) / (2n)). Both are
//! conservative, which is the right direction for a bound checker: a PASS
//! verdict survives the interval being a little too wide.

use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("confidence must lie strictly inside (0, 1), got {0}")]
    ConfidenceOutOfRange(f64),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("hits {hits} exceed trials {trials}")]
    HitsExceedTrials { hits: u64, trials: u64 },
}

/// A Bernoulli tail estimate with an exact binomial confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub trials: u64,
    pub hits: u64,
    /// Point estimate hits / trials.
    pub point: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence: f64,
}

impl TailEstimate {
    pub fn from_hits(hits: u64, trials: u64, confidence: f64) -> Result<Self, StatsError> {
        if trials == 0 {
            return Err(StatsError::NoTrials);
        }
        if hits > trials {
            return Err(StatsError::HitsExceedTrials { hits, trials });
        }
        check_confidence(confidence)?;
        let (ci_lower, ci_upper) = clopper_pearson(hits, trials, confidence);
        Ok(TailEstimate {
            trials,
            hits,
            point: hits as f64 / trials as f64,
            ci_lower,
            ci_upper,
            confidence,
        })
    }
}

/// Exact Clopper-Pearson interval for h hits in n trials.
///
/// Panics only if the beta quantile solver does, which for the parameter
/// ranges reachable here (integer shapes >= 1) it does not.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let alpha = 1.0 - confidence;
    let h = hits as f64;
    let n = trials as f64;
    let lower = if hits == 0 {
        0.0
    } else {
        Beta::new(h, n - h + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let upper = if hits == trials {
        1.0
    } else {
        Beta::new(h + 1.0, n - h).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// A mean estimate for observations known to lie in [0, range], with a
/// Hoeffding confidence interval clipped to that range.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub trials: u64,
    pub mean: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence: f64,
    pub range: f64,
}

impl MeanEstimate {
    pub fn from_sum(sum: f64, trials: u64, range: f64, confidence: f64) -> Result<Self, StatsError> {
        if trials == 0 {
            return Err(StatsError::NoTrials);
        }
        check_confidence(confidence)?;
        let n = trials as f64;
        let mean = sum / n;
        let alpha = 1.0 - confidence;
        let half = range * ((2.0 / alpha).ln() / (2.0 * n)).sqrt();
        Ok(MeanEstimate {
            trials,
            mean,
            ci_lower: (mean - half).max(0.0),
            ci_upper: (mean + half).min(range),
            confidence,
            range,
        })
    }
}

fn check_confidence(confidence: f64) -> Result<(), StatsError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::ConfidenceOutOfRange(confidence));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol * want.abs().max(1.0),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn boundary_cases_use_closed_forms() {
        // h = 0: upper = 1 - (alpha/2)^(1/n), lower = 0.
        let (lo, hi) = clopper_pearson(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        assert_close(hi, 1.0 - (0.025f64).powf(0.01), 1e-12);
        assert_close(hi, 0.03621669264517646, 1e-12);
        // h = n mirrors it.
        let (lo, hi) = clopper_pearson(100, 100, 0.95);
        assert_eq!(hi, 1.0);
        assert_close(lo, (0.025f64).powf(0.01), 1e-12);
    }

    #[test]
    fn interior_cases_match_reference_beta_quantiles() {
        let (lo, hi) = clopper_pearson(13, 100, 0.95);
        assert_close(lo, 0.07107304618542955, 1e-9);
        assert_close(hi, 0.21204067708744978, 1e-9);

        let (lo, hi) = clopper_pearson(13, 100, 0.99);
        assert_close(lo, 0.05769745374714847, 1e-9);
        assert_close(hi, 0.23919550781779267, 1e-9);

        let (lo, hi) = clopper_pearson(1, 10, 0.99);
        assert_close(lo, 0.0005011285754646343, 1e-9);
        assert_close(hi, 0.5442870568996868, 1e-9);

        let (lo, hi) = clopper_pearson(250, 1000, 0.99);
        assert_close(lo, 0.21549682324153835, 1e-9);
        assert_close(hi, 0.28692213444023573, 1e-9);
    }

    #[test]
    fn estimate_brackets_the_point() {
        let e = TailEstimate::from_hits(250, 1000, 0.99).unwrap();
        assert_eq!(e.point, 0.25);
        assert!(e.ci_lower <= e.point && e.point <= e.ci_upper);
        assert!(e.ci_lower >= 0.0 && e.ci_upper <= 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            TailEstimate::from_hits(1, 0, 0.99),
            Err(StatsError::NoTrials)
        );
        assert_eq!(
            TailEstimate::from_hits(11, 10, 0.99),
            Err(StatsError::HitsExceedTrials { hits: 11, trials: 10 })
        );
        assert_eq!(
            TailEstimate::from_hits(1, 10, 1.0),
            Err(StatsError::ConfidenceOutOfRange(1.0))
        );
    }

    #[test]
    fn hoeffding_interval_shrinks_with_trials() {
        let small = MeanEstimate::from_sum(50.0, 100, 1.0, 0.99).unwrap();
        let large = MeanEstimate::from_sum(5000.0, 10000, 1.0, 0.99).unwrap();
        assert_close(small.mean, 0.5, 1e-12);
        assert_close(large.mean, 0.5, 1e-12);
        assert!(large.ci_upper - large.ci_lower < small.ci_upper - small.ci_lower);
        // Frozen half-width: 1.0 * sqrt(ln(200)/200).
        let half = (200f64.ln() / 200.0).sqrt();
        assert_close(small.ci_upper, 0.5 + half, 1e-12);
    }
}
