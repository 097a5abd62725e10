//! Logistic-map amplifier for the success weight `q^2`.
//!
//! The one-qubit state left by the SAT circuit is read as
//! `ρ = q² P₁ + (1 − q²) P₀`, and the classical map `g(x) = a x (1 − x)` is
//! iterated from `x₀ = q²`. With `ρ_m = (I + g^m(q²) σ₃) / 2` the measured
//! value `M_m = tr ρ_m σ₃` is just `x_m`. Because `0` is a fixed point of `g`,
//! `q = 0` never crosses the threshold; any `q > 0` of the form `r / 2^n` is
//! expected to cross `1/2` within `2n` steps.
//!
//! Double precision is the working engine. [`iterate_oracle`] re-runs the same
//! map in fixed-point interval arithmetic on big integers so that the
//! crossing step can be certified independently of `f64` rounding.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_A: f64 = 3.71;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum AmplifierError {
    #[error("x = {0} outside [0, 1]")]
    DomainX(f64),
    #[error("a = {0} outside [0, 4]")]
    DomainA(f64),
    #[error("q^2 = {0} outside [0, 1]")]
    DomainQ2(f64),
    #[error("threshold {0} must be finite")]
    Threshold(f64),
    #[error("{numer}/2^{exp} is not in [0, 1]")]
    Dyadic { numer: u64, exp: u32 },
    #[error("map parameter {num}/{den} outside [0, 4]")]
    RationalA { num: u64, den: u64 },
    #[error("precision {got} bits is below the required {required}")]
    PrecisionTooLow { got: u32, required: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogisticParams {
    pub a: f64,
    pub max_steps: usize,
    pub threshold: f64,
}

impl LogisticParams {
    pub fn new(a: f64, max_steps: usize, threshold: f64) -> Result<Self, AmplifierError> {
        if !(0.0..=4.0).contains(&a) {
            return Err(AmplifierError::DomainA(a));
        }
        if !threshold.is_finite() {
            return Err(AmplifierError::Threshold(threshold));
        }
        Ok(LogisticParams {
            a,
            max_steps,
            threshold,
        })
    }

    /// `a = 3.71`, `2n` steps, threshold `1/2`.
    pub fn for_vars(n: usize) -> Self {
        LogisticParams {
            a: DEFAULT_A,
            max_steps: 2 * n,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosTrajectory {
    /// `x_0 … x_M`.
    pub xs: Vec<f64>,
    /// Least `m` with `x_m > threshold`.
    pub first_crossing: Option<usize>,
}

/// Diagonal one-qubit density matrix `diag(p0, p1)` in the `|0⟩, |1⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitDensity {
    pub p0: f64,
    pub p1: f64,
}

impl QubitDensity {
    /// `ρ_m = (I + x σ₃) / 2`.
    pub fn from_sigma3(x: f64) -> Self {
        QubitDensity {
            p0: (1.0 + x) / 2.0,
            p1: (1.0 - x) / 2.0,
        }
    }

    /// `tr ρ σ₃` with `σ₃ = |0⟩⟨0| − |1⟩⟨1|`.
    pub fn sigma3(&self) -> f64 {
        self.p0 - self.p1
    }
}

/// `ρ = q² P₁ + (1 − q²) P₀`.
pub fn density_from_q(q_squared: f64) -> Result<QubitDensity, AmplifierError> {
    if !(0.0..=1.0).contains(&q_squared) {
        return Err(AmplifierError::DomainQ2(q_squared));
    }
    Ok(QubitDensity {
        p0: 1.0 - q_squared,
        p1: q_squared,
    })
}

pub fn logistic_step(x: f64, a: f64) -> Result<f64, AmplifierError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(AmplifierError::DomainX(x));
    }
    if !(0.0..=4.0).contains(&a) {
        return Err(AmplifierError::DomainA(a));
    }
    Ok(a * x * (1.0 - x))
}

pub fn iterate(q_squared: f64, params: &LogisticParams) -> Result<ChaosTrajectory, AmplifierError> {
    if !(0.0..=1.0).contains(&q_squared) {
        return Err(AmplifierError::DomainQ2(q_squared));
    }
    let mut xs = Vec::with_capacity(params.max_steps + 1);
    let mut x = q_squared;
    xs.push(x);
    for _ in 0..params.max_steps {
        x = logistic_step(x, params.a)?;
        xs.push(x);
    }
    let first_crossing = xs.iter().position(|&x| x > params.threshold);
    Ok(ChaosTrajectory { xs, first_crossing })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Sat,
    Unsat,
}

/// SAT iff the trajectory from `q²` crosses the threshold within
/// `params.max_steps` steps (`2n` by default).
pub fn decide_sat(
    q_squared: f64,
    params: &LogisticParams,
) -> Result<(Decision, ChaosTrajectory), AmplifierError> {
    let traj = iterate(q_squared, params)?;
    let decision = if traj.first_crossing.is_some() {
        Decision::Sat
    } else {
        Decision::Unsat
    };
    Ok((decision, traj))
}

/// `(n − 1) / (log₂ a − 1)`.
pub fn crossing_lower_bound(n: usize, a: f64) -> f64 {
    (n as f64 - 1.0) / (a.log2() - 1.0)
}

/// Every `(n, r)` with `1 ≤ n ≤ max_n`, `1 ≤ r ≤ 2^n` whose trajectory from
/// `r / 2^n` fails to cross `1/2` within `2n` steps.
pub fn undetected_weights(max_n: usize, a: f64) -> Result<Vec<(usize, u64)>, AmplifierError> {
    let mut misses = Vec::new();
    for n in 1..=max_n {
        let params = LogisticParams::new(a, 2 * n, DEFAULT_THRESHOLD)?;
        let denom = (1u64 << n) as f64;
        for r in 1..=1u64 << n {
            if iterate(r as f64 / denom, &params)?.first_crossing.is_none() {
                misses.push((n, r));
            }
        }
    }
    Ok(misses)
}

/// `numer / 2^exp`, an exact success weight `r / 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dyadic {
    pub numer: u64,
    pub exp: u32,
}

impl Dyadic {
    pub fn new(numer: u64, exp: u32) -> Result<Self, AmplifierError> {
        if exp > 63 || numer > 1u64 << exp {
            return Err(AmplifierError::Dyadic { numer, exp });
        }
        Ok(Dyadic { numer, exp })
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / (1u64 << self.exp) as f64
    }
}

/// Trajectory from the interval oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedTrajectory {
    /// Midpoints of the enclosing intervals, rounded to `f64`.
    pub trajectory: ChaosTrajectory,
    /// True when every step before `first_crossing` lies entirely at or below
    /// the threshold and the crossing step lies entirely above it (or, with no
    /// crossing, every step lies at or below).
    pub certified: bool,
    /// Largest interval width seen, as a real number.
    pub max_width: f64,
}

/// Minimum precision accepted by [`iterate_oracle`] for `max_steps` steps.
pub fn required_precision(max_steps: usize) -> u32 {
    64 + 2 * max_steps as u32
}

/// Iterates `g(x) = (a_num / a_den) x (1 − x)` from an exact dyadic start in
/// fixed point with `precision_bits` fractional bits, carrying a floor/ceil
/// enclosure `[lo, hi]` of the exact real trajectory.
pub fn iterate_oracle(
    q_squared: Dyadic,
    a_num: u64,
    a_den: u64,
    max_steps: usize,
    threshold: f64,
    precision_bits: u32,
) -> Result<CertifiedTrajectory, AmplifierError> {
    let required = required_precision(max_steps);
    if precision_bits < required {
        return Err(AmplifierError::PrecisionTooLow {
            got: precision_bits,
            required,
        });
    }
    if a_den == 0 || a_num > 4 * a_den {
        return Err(AmplifierError::RationalA {
            num: a_num,
            den: a_den,
        });
    }
    if !threshold.is_finite() {
        return Err(AmplifierError::Threshold(threshold));
    }
    let fixed = FixedPoint::new(precision_bits, a_num, a_den);
    let start = BigUint::from(q_squared.numer) << (precision_bits - q_squared.exp);
    let mut lo = start.clone();
    let mut hi = start;

    let mut mids = Vec::with_capacity(max_steps + 1);
    let mut max_width = BigUint::zero();
    let mut first_crossing = None;
    let mut ambiguous_before = false;
    let mut certified = true;
    for m in 0..=max_steps {
        mids.push(fixed.to_f64(&((&lo + &hi) >> 1u32)));
        if &hi - &lo > max_width {
            max_width = &hi - &lo;
        }
        if first_crossing.is_none() {
            if fixed.exceeds(&lo, threshold) {
                first_crossing = Some(m);
                certified = !ambiguous_before;
            } else if fixed.exceeds(&hi, threshold) {
                ambiguous_before = true;
                certified = false;
            }
        }
        if m < max_steps {
            (lo, hi) = fixed.step_interval(&lo, &hi);
        }
    }
    Ok(CertifiedTrajectory {
        trajectory: ChaosTrajectory {
            xs: mids,
            first_crossing,
        },
        certified,
        max_width: fixed.to_f64(&max_width),
    })
}

/// Reals in `[0, 1]` stored as integers over `2^bits`.
struct FixedPoint {
    bits: u32,
    one: BigUint,
    half: BigUint,
    a_num: BigUint,
    /// `a_den · 2^bits`, the divisor of `a_num · y · (one − y)`.
    divisor: BigUint,
    /// `ceil(a / 4)` in fixed point, the maximum of `g`.
    peak: BigUint,
}

impl FixedPoint {
    fn new(bits: u32, a_num: u64, a_den: u64) -> Self {
        let one = BigUint::one() << bits;
        let half = BigUint::one() << (bits - 1);
        let a_num = BigUint::from(a_num);
        let divisor = BigUint::from(a_den) << bits;
        let peak = div_ceil(&(&a_num * &one), &(BigUint::from(a_den) * 4u32));
        FixedPoint {
            bits,
            one,
            half,
            a_num,
            divisor,
            peak,
        }
    }

    fn numerator(&self, y: &BigUint) -> BigUint {
        &self.a_num * y * (&self.one - y)
    }

    fn g_floor(&self, y: &BigUint) -> BigUint {
        self.numerator(y) / &self.divisor
    }

    fn g_ceil(&self, y: &BigUint) -> BigUint {
        div_ceil(&self.numerator(y), &self.divisor)
    }

    /// Enclosure of `g([lo, hi])`; `g` rises on `[0, 1/2]` and falls after.
    fn step_interval(&self, lo: &BigUint, hi: &BigUint) -> (BigUint, BigUint) {
        let (new_lo, new_hi) = if hi <= &self.half {
            (self.g_floor(lo), self.g_ceil(hi))
        } else if lo >= &self.half {
            (self.g_floor(hi), self.g_ceil(lo))
        } else {
            (self.g_floor(lo).min(self.g_floor(hi)), self.peak.clone())
        };
        (new_lo, new_hi.min(self.one.clone()))
    }

    /// Exact test `value / 2^bits > threshold` for a finite `f64` threshold.
    fn exceeds(&self, value: &BigUint, threshold: f64) -> bool {
        if threshold < 0.0 {
            return true;
        }
        if threshold == 0.0 {
            return !value.is_zero();
        }
        // threshold = mant · 2^exp exactly.
        let bits = threshold.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        // value · 2^-bits > mant · 2^exp  ⇔  value · 2^(-exp) > mant · 2^bits
        let lhs_shift = (-exp).max(0) as u64;
        let rhs_shift = self.bits as i64 + exp.max(0);
        let lhs = value << lhs_shift;
        let rhs = BigUint::from(mant) << rhs_shift as u64;
        lhs > rhs
    }

    fn to_f64(&self, value: &BigUint) -> f64 {
        // Keep the top 64 bits; the rest is below f64 resolution.
        let shift = self.bits.saturating_sub(64);
        let top = (value >> shift).to_f64().unwrap_or(f64::INFINITY);
        top * 2f64.powi(-((self.bits - shift) as i32))
    }
}

fn div_ceil(num: &BigUint, den: &BigUint) -> BigUint {
    (num + den - 1u32) / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logistic_step_examples() {
        assert_eq!(logistic_step(0.0, DEFAULT_A).unwrap(), 0.0);
        assert!((logistic_step(0.5, 3.71).unwrap() - 0.9275).abs() < 1e-15);
        assert!((logistic_step(0.9275, 3.71).unwrap() - 0.2494743125).abs() < 1e-15);
        assert_eq!(logistic_step(1.5, 3.71), Err(AmplifierError::DomainX(1.5)));
        assert_eq!(logistic_step(0.5, 4.5), Err(AmplifierError::DomainA(4.5)));
        assert!(LogisticParams::new(-0.1, 4, 0.5).is_err());
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_from_q(0.0).unwrap(), QubitDensity { p0: 1.0, p1: 0.0 });
        assert_eq!(density_from_q(1.0).unwrap(), QubitDensity { p0: 0.0, p1: 1.0 });
        assert_eq!(density_from_q(0.75).unwrap(), QubitDensity { p0: 0.25, p1: 0.75 });
        assert!(density_from_q(1.01).is_err());
    }

    #[test]
    fn iterate_examples() {
        let zero = iterate(0.0, &LogisticParams::for_vars(10)).unwrap();
        assert!(zero.xs.iter().all(|&x| x == 0.0));
        assert_eq!(zero.first_crossing, None);
        assert_eq!(zero.xs.len(), 21);

        let small = iterate(2f64.powi(-10), &LogisticParams::new(3.71, 20, 0.5).unwrap()).unwrap();
        assert!(small.first_crossing.unwrap() <= 20);

        let one = iterate(1.0, &LogisticParams::for_vars(3)).unwrap();
        assert_eq!(one.first_crossing, Some(0));
        assert_eq!(one.xs[1], 0.0);
    }

    #[test]
    fn decide_examples() {
        let (d, t) = decide_sat(0.75, &LogisticParams::for_vars(2)).unwrap();
        assert_eq!((d, t.first_crossing), (Decision::Sat, Some(0)));
        let (d, _) = decide_sat(0.0, &LogisticParams::for_vars(1)).unwrap();
        assert_eq!(d, Decision::Unsat);
        // n = 10 crosses at step 5, both in f64 and in the certified oracle.
        let (d, t) = decide_sat(2f64.powi(-10), &LogisticParams::for_vars(10)).unwrap();
        assert_eq!((d, t.first_crossing), (Decision::Sat, Some(5)));
        let o = iterate_oracle(Dyadic::new(1, 10).unwrap(), 371, 100, 20, 0.5, 104).unwrap();
        assert!(o.certified);
        assert_eq!(o.trajectory.first_crossing, Some(5));
    }

    #[test]
    fn sigma3_expectation_is_the_trajectory() {
        let t = iterate(2f64.powi(-6), &LogisticParams::for_vars(6)).unwrap();
        for &x in &t.xs {
            let rho = QubitDensity::from_sigma3(x);
            assert!((rho.sigma3() - x).abs() <= f64::EPSILON);
            assert!((rho.p0 + rho.p1 - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn bound_value_at_ten() {
        let b = crossing_lower_bound(10, DEFAULT_A);
        assert!((b - 10.096).abs() < 1e-3, "{b}");
        assert_eq!(crossing_lower_bound(1, DEFAULT_A), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let zero = iterate_oracle(Dyadic::new(0, 4).unwrap(), 371, 100, 8, 0.5, 80).unwrap();
        assert!(zero.trajectory.xs.iter().all(|&x| x == 0.0));
        assert_eq!(zero.max_width, 0.0);
        assert!(zero.certified);

        // x1 = 3.71 / 4 = 371/400 exactly; the enclosure must contain it.
        let p = 80u32;
        let fixed = FixedPoint::new(p, 371, 100);
        let half = BigUint::one() << (p - 1);
        let (lo, hi) = fixed.step_interval(&half, &half);
        let target = BigUint::from(371u32) << p;
        assert!(&lo * 400u32 <= target && target <= &hi * 400u32);
        let o = iterate_oracle(Dyadic::new(1, 1).unwrap(), 371, 100, 1, 0.5, p).unwrap();
        assert!((o.trajectory.xs[1] - 0.9275).abs() < 1e-15);

        assert_eq!(
            iterate_oracle(Dyadic::new(1, 4).unwrap(), 371, 100, 10, 0.5, 70),
            Err(AmplifierError::PrecisionTooLow { got: 70, required: 84 })
        );
        assert!(iterate_oracle(Dyadic::new(1, 4).unwrap(), 401, 100, 1, 0.5, 80).is_err());
        assert!(Dyadic::new(5, 2).is_err());
    }

    #[test]
    fn oracle_agrees_with_f64_on_power_of_two_sweep() {
        for n in 1..=20usize {
            let steps = 2 * n;
            let f = iterate(2f64.powi(-(n as i32)), &LogisticParams::for_vars(n)).unwrap();
            let o = iterate_oracle(
                Dyadic::new(1, n as u32).unwrap(),
                371,
                100,
                steps,
                0.5,
                required_precision(steps),
            )
            .unwrap();
            assert!(o.certified, "n={n}");
            assert_eq!(o.trajectory.first_crossing, f.first_crossing, "n={n}");
            assert!(f.first_crossing.is_some(), "n={n}");
        }
    }

    #[test]
    fn threshold_comparison_is_exact() {
        let fx = FixedPoint::new(70, 371, 100);
        let half = BigUint::one() << 69u32;
        assert!(!fx.exceeds(&half, 0.5));
        assert!(fx.exceeds(&(&half + 1u32), 0.5));
        assert!(fx.exceeds(&BigUint::one(), 0.0));
        assert!(!fx.exceeds(&BigUint::zero(), 0.0));
        let three_quarters = BigUint::from(3u32) << 68u32;
        assert!(!fx.exceeds(&three_quarters, 0.75));
        assert!(fx.exceeds(&three_quarters, 0.7499999));
    }

    proptest! {
        #[test]
        fn step_stays_in_unit_interval(x in 0.0f64..=1.0, a in 0.0f64..=4.0) {
            let y = logistic_step(x, a).unwrap();
            prop_assert!((0.0..=1.0).contains(&y));
        }

        #[test]
        fn zero_is_never_reported_sat(steps in 0usize..200, a in 0.0f64..=4.0) {
            let p = LogisticParams::new(a, steps, 0.5).unwrap();
            prop_assert_eq!(decide_sat(0.0, &p).unwrap().0, Decision::Unsat);
        }

        #[test]
        fn oracle_enclosure_contains_f64_trajectory_early(r in 1u64..=256, n in 8u32..=8) {
            // For the first few steps f64 error is tiny compared with any
            // meaningful gap, so the f64 value must lie within the enclosure
            // widened by a few ulps.
            let steps = 6;
            let f = iterate(r as f64 / 256.0, &LogisticParams::new(3.71, steps, 0.5).unwrap()).unwrap();
            let o = iterate_oracle(Dyadic::new(r, n).unwrap(), 371, 100, steps, 0.5, 96).unwrap();
            for (a, b) in f.xs.iter().zip(&o.trajectory.xs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
