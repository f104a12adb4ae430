//! Closed-form tail bounds for bounded-increment processes, evaluated in log
//! space.
//!
//! The central family bounds the upper tail of a sum of n adaptively chosen
//! increments X_i in [0, c] whose conditional means are budgeted by mu
//! (sum of E[X_i | past] <= mu):
//!
//! ```text
//! Pr[sum >= (1+delta) mu] <= exp( -delta^2 mu / ((2+delta) c) )        (simple)
//! Pr[sum >= (1+delta) mu] <= exp( (mu/c) (delta - (1+delta)ln(1+delta)) )  (sharp)
//! ```
//!
//! and the matching lower tail under the floor budget sum of means >= mu,
//! for 0 <= delta < 1:
//!
//! ```text
//! Pr[sum <= (1-delta) mu] <= exp( -delta^2 mu / (2c) )                 (simple)
//! Pr[sum <= (1-delta) mu] <= exp( (mu/c) (-delta - (1-delta)ln(1-delta)) ) (sharp)
//! ```
//!
//! Setting c = 1 recovers the classical multiplicative Chernoff bounds; the
//! additive bound exp(-eps^2 / (2 sum c_i^2)) covers increments in
//! [-c_i, c_i] centered at their conditional means. The simple forms follow
//! from the sharp ones through two scalar inequalities whose slack
//! [`check_log_inequalities`] reports pointwise:
//!
//! ```text
//! delta - (1+delta)ln(1+delta) <= -delta^2 / (2+delta)    (delta > 0)
//! -delta - (1-delta)ln(1-delta) <= -delta^2 / 2           (0 <= delta < 1)
//! ```
//!
//! Everything is computed as a log first and exponentiated once, so budgets
//! up to 1e12 produce exact zeros instead of underflow noise, and delta = 0
//! yields the trivial bound 1 everywhere.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("increment range c must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("mean budget mu must be nonnegative, got {0}")]
    NegativeBudget(f64),
    #[error("delta must be nonnegative, got {0}")]
    NegativeDelta(f64),
    #[error("lower-tail bounds need delta < 1, got {0}")]
    DeltaAtLeastOne(f64),
    #[error("eps must be nonnegative, got {0}")]
    NegativeEps(f64),
    #[error("the per-step range list must be non-empty")]
    EmptyRanges,
    #[error("every per-step range must be positive, got {0}")]
    NonPositiveStepRange(f64),
    #[error("step count n must be at least 1")]
    ZeroSteps,
    #[error("failure probability must lie strictly inside (0, 1), got {0}")]
    FailureProbOutOfRange(f64),
    #[error("ball count P must be at least 1")]
    ZeroBalls,
    #[error("toss budget M must be at least 1")]
    ZeroTossBudget,
    #[error("mgf envelope needs a >= 0, b >= 0 and a + b > 0, got a={a}, b={b}")]
    DegenerateMgfRange { a: f64, b: f64 },
    #[error("mgf envelope needs t != 0")]
    ZeroMgfArgument,
    #[error("grid point {delta} is outside the {family} inequality domain")]
    GridPointOutOfDomain { family: &'static str, delta: f64 },
}

fn check_finite(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::NotFinite { name, value })
    }
}

/// A probability bound carried in log space.
///
/// `value` = min(1, exp(log_value)); `log_value` <= 0 always. For very
/// negative logs `value` underflows to an honest 0 while `log_value` stays
/// exact, so callers comparing microscopic bounds should compare logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub value: f64,
    pub log_value: f64,
}

impl TailBound {
    /// Builds from a log-probability, clamping rounding residue above 0.
    pub fn from_log(log_value: f64) -> Self {
        let log_value = log_value.min(0.0);
        TailBound {
            value: log_value.exp().min(1.0),
            log_value,
        }
    }

    /// The trivial bound 1.
    pub fn trivial() -> Self {
        TailBound::from_log(0.0)
    }
}

/// Query for the multiplicative bound family: increments in [0, c], mean
/// budget mu, tail offset delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub mu: f64,
    pub c: f64,
    pub delta: f64,
}

impl BoundQuery {
    pub fn new(mu: f64, c: f64, delta: f64) -> Result<Self, BoundsError> {
        let q = BoundQuery { mu, c, delta };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        check_finite("mu", self.mu)?;
        check_finite("c", self.c)?;
        check_finite("delta", self.delta)?;
        if self.c <= 0.0 {
            return Err(BoundsError::NonPositiveRange(self.c));
        }
        if self.mu < 0.0 {
            return Err(BoundsError::NegativeBudget(self.mu));
        }
        if self.delta < 0.0 {
            return Err(BoundsError::NegativeDelta(self.delta));
        }
        Ok(())
    }

    fn validate_lower(&self) -> Result<(), BoundsError> {
        self.validate()?;
        if self.delta >= 1.0 {
            return Err(BoundsError::DeltaAtLeastOne(self.delta));
        }
        Ok(())
    }
}

/// Upper tail, simple form: log = -delta^2 mu / ((2+delta) c).
pub fn mult_azuma_upper(q: &BoundQuery) -> Result<TailBound, BoundsError> {
    q.validate()?;
    Ok(TailBound::from_log(
        -q.delta * q.delta * q.mu / ((2.0 + q.delta) * q.c),
    ))
}

/// Upper tail, sharp form: log = (mu/c) (delta - (1+delta)ln(1+delta)).
pub fn mult_azuma_upper_sharp(q: &BoundQuery) -> Result<TailBound, BoundsError> {
    q.validate()?;
    Ok(TailBound::from_log(q.mu / q.c * upper_sharp_exponent(q.delta)))
}

/// Lower tail, simple form: log = -delta^2 mu / (2c). Needs delta < 1.
pub fn mult_azuma_lower(q: &BoundQuery) -> Result<TailBound, BoundsError> {
    q.validate_lower()?;
    Ok(TailBound::from_log(-q.delta * q.delta * q.mu / (2.0 * q.c)))
}

/// Lower tail, sharp form: log = (mu/c) (-delta - (1-delta)ln(1-delta)).
/// Needs delta < 1.
pub fn mult_azuma_lower_sharp(q: &BoundQuery) -> Result<TailBound, BoundsError> {
    q.validate_lower()?;
    Ok(TailBound::from_log(q.mu / q.c * lower_sharp_exponent(q.delta)))
}

const SERIES_CUTOFF: f64 = 0.25;

/// Per-unit sharp upper exponent delta - (1+delta)ln(1+delta), evaluated
/// without cancellation: the direct form loses ~7 digits at delta = 1e-6,
/// so below the cutoff we sum -d^2/2 + d^3/6 - d^4/12 + ...
/// (terms (-1)^(k+1) d^k / (k(k-1))).
pub fn upper_sharp_exponent(delta: f64) -> f64 {
    debug_assert!(delta >= 0.0);
    if delta < SERIES_CUTOFF {
        let mut term = -delta * delta / 2.0;
        let mut sum = term;
        let mut k = 2.0f64;
        while term.abs() > 1e-18 * sum.abs() && k < 80.0 {
            term *= -delta * (k - 1.0) / (k + 1.0);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        delta - (1.0 + delta) * delta.ln_1p()
    }
}

/// Per-unit sharp lower exponent -delta - (1-delta)ln(1-delta) for
/// 0 <= delta < 1, series -d^2/2 - d^3/6 - d^4/12 - ... below the cutoff.
pub fn lower_sharp_exponent(delta: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&delta));
    if delta < SERIES_CUTOFF {
        let mut term = -delta * delta / 2.0;
        let mut sum = term;
        let mut k = 2.0f64;
        while term.abs() > 1e-18 * sum.abs() && k < 80.0 {
            term *= delta * (k - 1.0) / (k + 1.0);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        -delta - (1.0 - delta) * (-delta).ln_1p()
    }
}

/// Query for the additive bound: deviation eps, per-step ranges c_i (the
/// i-th increment stays within +-c_i of its conditional mean).
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveQuery {
    pub eps: f64,
    pub c_list: Vec<f64>,
}

impl AdditiveQuery {
    pub fn new(eps: f64, c_list: Vec<f64>) -> Result<Self, BoundsError> {
        let q = AdditiveQuery { eps, c_list };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        check_finite("eps", self.eps)?;
        if self.eps < 0.0 {
            return Err(BoundsError::NegativeEps(self.eps));
        }
        if self.c_list.is_empty() {
            return Err(BoundsError::EmptyRanges);
        }
        for &c in &self.c_list {
            check_finite("c_i", c)?;
            if c <= 0.0 {
                return Err(BoundsError::NonPositiveStepRange(c));
            }
        }
        Ok(())
    }
}

/// Additive bound: log = -eps^2 / (2 sum c_i^2).
pub fn additive_azuma(q: &AdditiveQuery) -> Result<TailBound, BoundsError> {
    q.validate()?;
    let sum_sq: f64 = q.c_list.iter().map(|c| c * c).sum();
    Ok(TailBound::from_log(-q.eps * q.eps / (2.0 * sum_sq)))
}

/// Query for the classical Chernoff family over n independent steps with
/// total mean mu. `eps` feeds the additive variant, `delta` the
/// multiplicative ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffQuery {
    pub n: u64,
    pub mu: f64,
    pub eps: f64,
    pub delta: f64,
}

impl ChernoffQuery {
    pub fn new(n: u64, mu: f64, eps: f64, delta: f64) -> Result<Self, BoundsError> {
        let q = ChernoffQuery { n, mu, eps, delta };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.n == 0 {
            return Err(BoundsError::ZeroSteps);
        }
        check_finite("mu", self.mu)?;
        check_finite("eps", self.eps)?;
        check_finite("delta", self.delta)?;
        if self.mu < 0.0 {
            return Err(BoundsError::NegativeBudget(self.mu));
        }
        if self.eps < 0.0 {
            return Err(BoundsError::NegativeEps(self.eps));
        }
        if self.delta < 0.0 {
            return Err(BoundsError::NegativeDelta(self.delta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChernoffVariant {
    /// Pr[X >= E[X] + eps] <= exp(-2 eps^2 / n) for X a sum of n values in [0,1].
    Additive,
    /// Pr[X >= (1+delta) mu] <= exp(-delta^2 mu / (2+delta)).
    MultUpper,
    /// Pr[X <= (1-delta) mu] <= exp(-delta^2 mu / 2), delta < 1.
    MultLower,
}

/// Classical Chernoff bounds. The multiplicative variants delegate to the
/// c = 1 bounded-increment forms, so they agree with those bit for bit.
pub fn chernoff(q: &ChernoffQuery, variant: ChernoffVariant) -> Result<TailBound, BoundsError> {
    q.validate()?;
    match variant {
        ChernoffVariant::Additive => Ok(TailBound::from_log(-2.0 * q.eps * q.eps / q.n as f64)),
        ChernoffVariant::MultUpper => mult_azuma_upper(&BoundQuery {
            mu: q.mu,
            c: 1.0,
            delta: q.delta,
        }),
        ChernoffVariant::MultLower => mult_azuma_lower(&BoundQuery {
            mu: q.mu,
            c: 1.0,
            delta: q.delta,
        }),
    }
}

/// Envelope on E[exp(tX)] for a random variable with -a <= X <= b and
/// E[X] <= 0 when t > 0 (respectively E[X] >= 0 when t < 0):
///
/// ```text
/// E[exp(tX)] <= exp( (a/(a+b)) (e^(t(a+b)) - 1) - ta )
/// ```
///
/// Returned as a plain positive real; it routinely exceeds 1.
pub fn mgf_bound(t: f64, a: f64, b: f64) -> Result<f64, BoundsError> {
    check_finite("t", t)?;
    check_finite("a", a)?;
    check_finite("b", b)?;
    if a < 0.0 || b < 0.0 || a + b <= 0.0 {
        return Err(BoundsError::DegenerateMgfRange { a, b });
    }
    if t == 0.0 {
        return Err(BoundsError::ZeroMgfArgument);
    }
    let width = a + b;
    Ok((a / width * (t * width).exp_m1() - t * a).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecyclingCase {
    /// M >= P ln(1/eps): the delay threshold is dominated by the 3M term.
    LargeM,
    /// M < P ln(1/eps): dominated by the 2P ln(1/eps) term.
    SmallM,
}

impl RecyclingCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecyclingCase::LargeM => "large_M",
            RecyclingCase::SmallM => "small_M",
        }
    }
}

/// High-probability total-delay threshold for the (P, M)-recycling game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecyclingBound {
    /// Pr[total delay >= threshold] <= failure_prob.
    pub threshold: f64,
    pub failure_prob: f64,
    pub case: RecyclingCase,
}

/// threshold = 3M + 2P ln(1/eps); ties on the case split go to LargeM.
pub fn recycling_delay_bound(p: u32, m: u64, eps: f64) -> Result<RecyclingBound, BoundsError> {
    if p == 0 {
        return Err(BoundsError::ZeroBalls);
    }
    if m == 0 {
        return Err(BoundsError::ZeroTossBudget);
    }
    check_finite("eps", eps)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BoundsError::FailureProbOutOfRange(eps));
    }
    let log_inv = (1.0 / eps).ln();
    let pf = p as f64;
    let mf = m as f64;
    let case = if mf >= pf * log_inv {
        RecyclingCase::LargeM
    } else {
        RecyclingCase::SmallM
    };
    Ok(RecyclingBound {
        threshold: 3.0 * mf + 2.0 * pf * log_inv,
        failure_prob: eps,
        case,
    })
}

/// The two delay-tail bounds compared in the recycling analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComparison {
    /// Multiplicative route: exp(-delta^2 M / ((2+delta) P)).
    pub good: TailBound,
    /// Additive route (worst-case per-toss range P): exp(-delta^2 M / (2 P^2)).
    pub bad: TailBound,
}

/// Evaluates both delay-tail bounds for Pr[D >= (1+delta) M]. The
/// multiplicative one wins (good <= bad) whenever delta <= 2P - 2.
pub fn compare_recycling_bounds(p: u32, m: u64, delta: f64) -> Result<BoundComparison, BoundsError> {
    if p == 0 {
        return Err(BoundsError::ZeroBalls);
    }
    if m == 0 {
        return Err(BoundsError::ZeroTossBudget);
    }
    check_finite("delta", delta)?;
    if delta < 0.0 {
        return Err(BoundsError::NegativeDelta(delta));
    }
    let pf = p as f64;
    let mf = m as f64;
    Ok(BoundComparison {
        good: TailBound::from_log(-delta * delta * mf / ((2.0 + delta) * pf)),
        bad: TailBound::from_log(-delta * delta * mf / (2.0 * pf * pf)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityFamily {
    /// delta - (1+delta)ln(1+delta) <= -delta^2/(2+delta) on (0, inf).
    Upper,
    /// -delta - (1-delta)ln(1-delta) <= -delta^2/2 on [0, 1).
    Lower,
}

impl InequalityFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityFamily::Upper => "upper",
            InequalityFamily::Lower => "lower",
        }
    }
}

/// One grid point of a scalar inequality check: slack = lhs - rhs, so the
/// inequality holds iff slack <= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackPoint {
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Evaluates one of the two scalar log inequalities over a grid, reporting
/// slack instead of asserting so callers can emit the curves.
pub fn check_log_inequalities(
    family: InequalityFamily,
    grid: &[f64],
) -> Result<Vec<SlackPoint>, BoundsError> {
    let mut points = Vec::with_capacity(grid.len());
    for &delta in grid {
        check_finite("delta", delta)?;
        let in_domain = match family {
            InequalityFamily::Upper => delta > 0.0,
            InequalityFamily::Lower => (0.0..1.0).contains(&delta),
        };
        if !in_domain {
            return Err(BoundsError::GridPointOutOfDomain {
                family: family.as_str(),
                delta,
            });
        }
        let (lhs, rhs) = match family {
            InequalityFamily::Upper => (upper_sharp_exponent(delta), -delta * delta / (2.0 + delta)),
            InequalityFamily::Lower => (lower_sharp_exponent(delta), -delta * delta / 2.0),
        };
        let slack = lhs - rhs;
        points.push(SlackPoint {
            delta,
            lhs,
            rhs,
            slack,
            holds: slack <= 0.0,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Relative comparison against references evaluated with 30-digit
    /// arithmetic and frozen here.
    fn assert_rel(got: f64, want: f64, tol: f64) {
        let scale = want.abs().max(f64::MIN_POSITIVE);
        assert!(
            (got - want).abs() <= tol * scale,
            "got {got:e}, want {want:e}, rel {:e}",
            (got - want).abs() / scale
        );
    }

    #[test]
    fn upper_simple_matches_references() {
        let b = mult_azuma_upper(&BoundQuery::new(10.0, 2.0, 1.0).unwrap()).unwrap();
        assert_rel(b.value, 0.188_875_602_837_561_83, 1e-12);
        assert_rel(b.log_value, -10.0 / 6.0, 1e-12);

        // mu = M, c = P, delta = 2 collapses to exp(-M/P).
        let b = mult_azuma_upper(&BoundQuery::new(1024.0, 16.0, 2.0).unwrap()).unwrap();
        assert_rel(b.log_value, -64.0, 1e-12);
        assert_rel(b.value, 1.603_810_890_548_638e-28, 1e-12);
    }

    #[test]
    fn upper_sharp_matches_references() {
        let b = mult_azuma_upper_sharp(&BoundQuery::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_rel(b.value, 0.679_570_457_114_761_3, 1e-12); // e/4
        assert_rel(b.log_value, -0.386_294_361_119_890_63, 1e-12); // 1 - 2 ln 2
    }

    #[test]
    fn lower_simple_matches_references() {
        let b = mult_azuma_lower(&BoundQuery::new(8.0, 2.0, 0.5).unwrap()).unwrap();
        assert_rel(b.value, 0.606_530_659_712_633_4, 1e-12);

        let b = mult_azuma_lower(&BoundQuery::new(1.0, 1.0, 0.5).unwrap()).unwrap();
        assert_rel(b.value, 0.882_496_902_584_595_5, 1e-12);
    }

    #[test]
    fn lower_sharp_matches_references() {
        let b = mult_azuma_lower_sharp(&BoundQuery::new(1.0, 1.0, 0.5).unwrap()).unwrap();
        assert_rel(b.value, 0.857_763_884_960_706_8, 1e-12);
        assert_rel(b.log_value, -0.153_426_409_720_027_36, 1e-12);
    }

    #[test]
    fn additive_matches_references() {
        let b = additive_azuma(&AdditiveQuery::new(2.0, vec![1.0; 4]).unwrap()).unwrap();
        assert_rel(b.value, 0.606_530_659_712_633_4, 1e-12);

        // Worst-case per-toss range P = 16 over M = 4 tosses.
        let b = additive_azuma(&AdditiveQuery::new(1.0, vec![16.0; 4]).unwrap()).unwrap();
        assert_rel(b.log_value, -1.0 / 2048.0, 1e-12);
        assert_rel(b.value, 0.999_511_837_939_889_4, 1e-12);
    }

    #[test]
    fn chernoff_matches_references() {
        let q = ChernoffQuery::new(100, 0.0, 10.0, 0.0).unwrap();
        let b = chernoff(&q, ChernoffVariant::Additive).unwrap();
        assert_rel(b.value, 0.135_335_283_236_612_7, 1e-12);
    }

    #[test]
    fn chernoff_mult_is_exactly_the_c1_specialization() {
        for delta in [0.0, 0.25, 0.5, 1.0, 2.5, 7.0] {
            let q = ChernoffQuery::new(50, 3.5, 0.0, delta).unwrap();
            let spec = chernoff(&q, ChernoffVariant::MultUpper).unwrap();
            let gen = mult_azuma_upper(&BoundQuery::new(3.5, 1.0, delta).unwrap()).unwrap();
            assert_eq!(spec.log_value.to_bits(), gen.log_value.to_bits());
            if delta < 1.0 {
                let spec = chernoff(&q, ChernoffVariant::MultLower).unwrap();
                let gen = mult_azuma_lower(&BoundQuery::new(3.5, 1.0, delta).unwrap()).unwrap();
                assert_eq!(spec.log_value.to_bits(), gen.log_value.to_bits());
            }
        }
    }

    #[test]
    fn mgf_envelope_matches_references() {
        // exp((e^2 - 1)/2 - 1)
        assert_rel(
            mgf_bound(1.0, 1.0, 1.0).unwrap(),
            8.975_763_940_452_538,
            1e-12,
        );
        // Symmetric two-point compare point: cosh(1) must stay below it.
        assert!(1.543_080_634_815_243_7 < mgf_bound(1.0, 1.0, 1.0).unwrap());
    }

    #[test]
    fn recycling_threshold_matches_references() {
        let b = recycling_delay_bound(16, 1024, 0.01).unwrap();
        assert_rel(b.threshold, 3_219.365_445_951_618_8, 1e-12);
        assert_eq!(b.case, RecyclingCase::LargeM);

        let b = recycling_delay_bound(1024, 10, 0.01).unwrap();
        assert_rel(b.threshold, 9_461.388_540_903_612, 1e-12);
        assert_eq!(b.case, RecyclingCase::SmallM);
    }

    #[test]
    fn recycling_case_tie_goes_to_large_m() {
        // P ln(1/eps) = 2 ln(e) ... pick eps = exp(-M/P) so M = P ln(1/eps).
        let eps = (-2.0f64).exp(); // M = 8, P = 4: P ln(1/eps) = 8 exactly
        let b = recycling_delay_bound(4, 8, eps).unwrap();
        assert_eq!(b.case, RecyclingCase::LargeM);
    }

    #[test]
    fn comparison_matches_references() {
        let c = compare_recycling_bounds(16, 1024, 2.0).unwrap();
        assert_rel(c.good.log_value, -64.0, 1e-12);
        assert_rel(c.bad.log_value, -8.0, 1e-12);
        assert_rel(c.bad.value, 0.000_335_462_627_902_511_85, 1e-12);

        // delta = P = 16: good is far smaller.
        let c = compare_recycling_bounds(16, 1024, 16.0).unwrap();
        assert_rel(c.good.log_value, -256.0 * 1024.0 / (18.0 * 16.0), 1e-12);
        assert_rel(c.bad.log_value, -512.0, 1e-12);
        assert!(c.good.log_value < c.bad.log_value);
    }

    #[test]
    fn delta_zero_gives_the_trivial_bound_everywhere() {
        let q = BoundQuery::new(5.0, 2.0, 0.0).unwrap();
        assert_eq!(mult_azuma_upper(&q).unwrap().value, 1.0);
        assert_eq!(mult_azuma_upper_sharp(&q).unwrap().value, 1.0);
        assert_eq!(mult_azuma_lower(&q).unwrap().value, 1.0);
        assert_eq!(mult_azuma_lower_sharp(&q).unwrap().value, 1.0);
        let cq = ChernoffQuery::new(10, 5.0, 0.0, 0.0).unwrap();
        assert_eq!(chernoff(&cq, ChernoffVariant::Additive).unwrap().value, 1.0);
        assert_eq!(chernoff(&cq, ChernoffVariant::MultUpper).unwrap().value, 1.0);
        assert_eq!(additive_azuma(&AdditiveQuery::new(0.0, vec![1.0]).unwrap()).unwrap().value, 1.0);
    }

    #[test]
    fn inequality_slack_matches_references_and_stays_nonpositive() {
        // delta = 1: (1 - 2 ln 2) - (-1/3).
        let pts = check_log_inequalities(InequalityFamily::Upper, &[1.0]).unwrap();
        assert_rel(pts[0].slack, -0.052_961_027_786_557_285, 1e-12);
        assert!(pts[0].holds);

        // delta = 0.5 lower: -0.5 - 0.5 ln 0.5 vs -0.125.
        let pts = check_log_inequalities(InequalityFamily::Lower, &[0.5]).unwrap();
        assert_rel(pts[0].lhs, -0.153_426_409_720_027_36, 1e-12);
        assert_rel(pts[0].rhs, -0.125, 1e-12);
        assert!(pts[0].holds);

        // Equality at the lower origin.
        let pts = check_log_inequalities(InequalityFamily::Lower, &[0.0]).unwrap();
        assert_eq!(pts[0].slack, 0.0);
        assert!(pts[0].holds);
    }

    #[test]
    fn inequality_domains_are_enforced() {
        assert!(matches!(
            check_log_inequalities(InequalityFamily::Upper, &[0.0]),
            Err(BoundsError::GridPointOutOfDomain { .. })
        ));
        assert!(matches!(
            check_log_inequalities(InequalityFamily::Lower, &[1.0]),
            Err(BoundsError::GridPointOutOfDomain { .. })
        ));
    }

    #[test]
    fn sharp_exponents_are_stable_at_tiny_delta() {
        // Leading term -delta^2/2 to <= 1e-15 relative at delta = 1e-6
        // (next term is delta^3/6, i.e. 3.3e-7 relative).
        let d = 1e-6;
        assert_rel(upper_sharp_exponent(d), -d * d / 2.0 * (1.0 - d / 3.0), 1e-12);
        assert_rel(lower_sharp_exponent(d), -d * d / 2.0 * (1.0 + d / 3.0), 1e-12);
        // Continuity across the series cutoff: both routes are accurate
        // to full precision at delta ~ 0.25 where there is no cancellation.
        for d in [0.2499999, 0.25, 0.2500001] {
            assert_rel(upper_sharp_exponent(d), d - (1.0 + d) * d.ln_1p(), 1e-13);
            assert_rel(lower_sharp_exponent(d), -d - (1.0 - d) * (-d).ln_1p(), 1e-13);
        }
    }

    #[test]
    fn domain_errors_fire() {
        assert_eq!(
            BoundQuery::new(1.0, 0.0, 1.0),
            Err(BoundsError::NonPositiveRange(0.0))
        );
        assert_eq!(
            BoundQuery::new(-1.0, 1.0, 1.0),
            Err(BoundsError::NegativeBudget(-1.0))
        );
        assert_eq!(
            BoundQuery::new(1.0, 1.0, -0.5),
            Err(BoundsError::NegativeDelta(-0.5))
        );
        assert_eq!(
            mult_azuma_lower(&BoundQuery { mu: 1.0, c: 1.0, delta: 1.0 }),
            Err(BoundsError::DeltaAtLeastOne(1.0))
        );
        assert_eq!(
            AdditiveQuery::new(1.0, vec![]),
            Err(BoundsError::EmptyRanges)
        );
        assert_eq!(
            AdditiveQuery::new(1.0, vec![1.0, -2.0]),
            Err(BoundsError::NonPositiveStepRange(-2.0))
        );
        assert_eq!(ChernoffQuery::new(0, 1.0, 1.0, 1.0), Err(BoundsError::ZeroSteps));
        assert_eq!(
            mgf_bound(0.0, 1.0, 1.0),
            Err(BoundsError::ZeroMgfArgument)
        );
        assert_eq!(
            mgf_bound(1.0, 0.0, 0.0),
            Err(BoundsError::DegenerateMgfRange { a: 0.0, b: 0.0 })
        );
        assert_eq!(
            recycling_delay_bound(0, 1, 0.5),
            Err(BoundsError::ZeroBalls)
        );
        assert_eq!(
            recycling_delay_bound(1, 1, 1.0),
            Err(BoundsError::FailureProbOutOfRange(1.0))
        );
        assert!(matches!(
            BoundQuery::new(f64::NAN, 1.0, 1.0),
            Err(BoundsError::NotFinite { name: "mu", .. })
        ));
    }

    #[test]
    fn no_overflow_at_extreme_budgets() {
        let q = BoundQuery::new(1e12, 1e-3, 10.0).unwrap();
        let b = mult_azuma_upper(&q).unwrap();
        assert!(b.log_value.is_finite());
        assert_eq!(b.value, 0.0); // honest underflow through log space
        let s = mult_azuma_upper_sharp(&q).unwrap();
        assert!(s.log_value.is_finite());
        assert!(s.log_value <= b.log_value);
    }

    proptest! {
        #[test]
        fn tail_bounds_live_in_the_unit_interval(
            mu in 0.0..1e12f64,
            c in 1e-6..1e6f64,
            delta in 0.0..100.0f64,
        ) {
            let q = BoundQuery::new(mu, c, delta).unwrap();
            for b in [mult_azuma_upper(&q).unwrap(), mult_azuma_upper_sharp(&q).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&b.value));
                prop_assert!(b.log_value <= 0.0);
            }
            if delta < 1.0 {
                for b in [mult_azuma_lower(&q).unwrap(), mult_azuma_lower_sharp(&q).unwrap()] {
                    prop_assert!((0.0..=1.0).contains(&b.value));
                    prop_assert!(b.log_value <= 0.0);
                }
            }
        }

        #[test]
        fn bounds_are_monotone_in_mu_and_delta(
            mu in 0.0..1e9f64,
            c in 1e-3..1e3f64,
            delta in 1e-9..50.0f64,
            bump in 1.0..4.0f64,
        ) {
            let base = mult_azuma_upper(&BoundQuery::new(mu, c, delta).unwrap()).unwrap();
            let more_mu = mult_azuma_upper(&BoundQuery::new(mu * bump + 1.0, c, delta).unwrap()).unwrap();
            let more_delta = mult_azuma_upper(&BoundQuery::new(mu, c, delta * bump + 1e-9).unwrap()).unwrap();
            prop_assert!(more_mu.log_value <= base.log_value + 1e-12);
            prop_assert!(more_delta.log_value <= base.log_value + 1e-12);
            // Widening the increment range weakens the bound.
            let wider_c = mult_azuma_upper(&BoundQuery::new(mu, c * bump, delta).unwrap()).unwrap();
            prop_assert!(wider_c.log_value >= base.log_value - 1e-12);
        }

        #[test]
        fn sharp_dominates_simple_pointwise(
            mu in 1e-3..1e9f64,
            c in 1e-3..1e3f64,
            delta in 1e-6..50.0f64,
        ) {
            let q = BoundQuery::new(mu, c, delta).unwrap();
            let simple = mult_azuma_upper(&q).unwrap();
            let sharp = mult_azuma_upper_sharp(&q).unwrap();
            prop_assert!(
                sharp.log_value <= simple.log_value + 1e-9 * simple.log_value.abs().max(1e-300),
                "sharp {} > simple {}", sharp.log_value, simple.log_value
            );
            if delta < 1.0 {
                let simple = mult_azuma_lower(&q).unwrap();
                let sharp = mult_azuma_lower_sharp(&q).unwrap();
                prop_assert!(sharp.log_value <= simple.log_value + 1e-9 * simple.log_value.abs().max(1e-300));
            }
        }

        #[test]
        fn inequality_slack_is_nonpositive_everywhere(
            upper_delta in 1e-9..1e4f64,
            lower_delta in 0.0..0.9999f64,
        ) {
            let up = check_log_inequalities(InequalityFamily::Upper, &[upper_delta]).unwrap();
            prop_assert!(up[0].holds, "upper slack {} at {}", up[0].slack, upper_delta);
            let lo = check_log_inequalities(InequalityFamily::Lower, &[lower_delta]).unwrap();
            prop_assert!(lo[0].holds, "lower slack {} at {}", lo[0].slack, lower_delta);
        }
    }
}
