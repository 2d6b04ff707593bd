//! Power-law gain sequences for the quantile and superquantile recursions.
//!
//! The quantile recursion uses `a_n = a1 * n^(-a)` and the superquantile
//! recursions use `b_n = b1 * (n + 1)^(-b)`. The shift by one in `b_n` is
//! kept as-is, so callers pass the same step counter to both gains.

use std::fmt;

use crate::error::{domain, Result};

/// Gain sequences `a_n = a1 n^-a` and `b_n = b1 (n+1)^-b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub a1: f64,
    pub a_exp: f64,
    pub b1: f64,
    pub b_exp: f64,
}

impl StepSchedule {
    /// Builds a schedule without checking the theorem hypotheses; see
    /// [`StepSchedule::validate`] and [`StepSchedule::checked`].
    pub const fn new(a1: f64, a_exp: f64, b1: f64, b_exp: f64) -> Self {
        Self {
            a1,
            a_exp,
            b1,
            b_exp,
        }
    }

    /// Builds a schedule and rejects it unless the multipliers are positive
    /// and `1/2 < a < b <= 1`.
    pub fn checked(a1: f64, a_exp: f64, b1: f64, b_exp: f64) -> Result<Self> {
        let s = Self::new(a1, a_exp, b1, b_exp);
        let report = s.validate();
        if !report.multipliers_positive {
            return Err(domain("gain multipliers a1 and b1 must be positive and finite"));
        }
        if !report.exponent_chain {
            return Err(domain(format!(
                "gain exponents must satisfy 1/2 < a < b <= 1 (got a={a_exp}, b={b_exp})"
            )));
        }
        Ok(s)
    }

    /// Quantile gain `a1 * n^(-a)`, defined for `n >= 1`.
    pub fn gain_a(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(domain("gain_a is defined for n >= 1"));
        }
        Ok(self.a1 * (n as f64).powf(-self.a_exp))
    }

    /// Superquantile gain `b1 * (n+1)^(-b)`, defined for every `n >= 0`.
    #[inline]
    pub fn gain_b(&self, n: u64) -> f64 {
        if self.b_exp == 1.0 {
            return self.b1 / (n as f64 + 1.0);
        }
        self.b1 * (n as f64 + 1.0).powf(-self.b_exp)
    }

    /// `true` when the superquantile gain decays like `1/n`.
    pub fn is_harmonic(&self) -> bool {
        self.b_exp == 1.0
    }

    /// Reports which theorem hypotheses this schedule satisfies. Never fails:
    /// running outside the hypotheses is allowed.
    pub fn validate(&self) -> ValidationReport {
        let multipliers_positive =
            self.a1 > 0.0 && self.b1 > 0.0 && self.a1.is_finite() && self.b1.is_finite();
        let exponent_chain = 0.5 < self.a_exp && self.a_exp < self.b_exp && self.b_exp <= 1.0;
        let (mse_b1_condition, clt_b1_condition) = if self.is_harmonic() {
            (
                Some(self.b1 > fast_mse_b1_floor(self.a_exp)),
                Some(self.b1 > 0.5),
            )
        } else {
            (None, None)
        };
        ValidationReport {
            multipliers_positive,
            exponent_chain,
            mse_b1_condition,
            clt_b1_condition,
        }
    }
}

/// `((1+a)/2) ∧ (5/2 - a)`: the multiplier `b1` must exceed this for the
/// `C/n` mean-squared-error bound of the harmonic regime.
pub fn fast_mse_b1_floor(a_exp: f64) -> f64 {
    ((1.0 + a_exp) / 2.0).min(2.5 - a_exp)
}

impl Default for StepSchedule {
    /// `a1 = 1, a = 2/3, b1 = 1, b = 1`.
    fn default() -> Self {
        Self::new(1.0, 2.0 / 3.0, 1.0, 1.0)
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a1={} a={} b1={} b={}",
            self.a1, self.a_exp, self.b1, self.b_exp
        )
    }
}

/// Which hypotheses a [`StepSchedule`] satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    /// `a1 > 0` and `b1 > 0`.
    pub multipliers_positive: bool,
    /// `1/2 < a < b <= 1`.
    pub exponent_chain: bool,
    /// For `b = 1`: `b1 > ((1+a)/2) ∧ (5/2 - a)`. `None` when `b < 1`.
    pub mse_b1_condition: Option<bool>,
    /// For `b = 1`: `b1 > 1/2`. `None` when `b < 1`.
    pub clt_b1_condition: Option<bool>,
}

impl ValidationReport {
    /// Multipliers positive and exponent chain satisfied.
    pub fn is_admissible(&self) -> bool {
        self.multipliers_positive && self.exponent_chain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gain_a_examples() {
        let s = StepSchedule::new(1.0, 2.0 / 3.0, 1.0, 1.0);
        assert_eq!(s.gain_a(1).unwrap(), 1.0);
        assert!((s.gain_a(8).unwrap() - 0.25).abs() < 1e-15);
        let s = StepSchedule::new(0.5, 0.6, 1.0, 1.0);
        // 0.5 * 1000^-0.6 evaluated with 40-digit arithmetic
        let expected = 0.007_924_465_962_305_567;
        assert!((s.gain_a(1000).unwrap() - expected).abs() < 1e-17);
    }

    #[test]
    fn gain_a_rejects_zero() {
        let s = StepSchedule::default();
        assert!(matches!(s.gain_a(0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn gain_b_examples() {
        let s = StepSchedule::new(1.0, 0.6, 1.0, 1.0);
        assert_eq!(s.gain_b(0), 1.0);
        assert_eq!(s.gain_b(3), 0.25);
        let s = StepSchedule::new(1.0, 0.6, 2.0, 0.75);
        assert!((s.gain_b(15) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn validate_examples() {
        let r = StepSchedule::new(1.0, 2.0 / 3.0, 1.0, 1.0).validate();
        assert!(r.is_admissible());
        assert_eq!(r.clt_b1_condition, Some(true));
        // floor is (5/6) ∧ (11/6) = 5/6 < 1
        assert!((fast_mse_b1_floor(2.0 / 3.0) - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.mse_b1_condition, Some(true));

        let r = StepSchedule::new(1.0, 0.4, 1.0, 0.8).validate();
        assert!(!r.exponent_chain);
        assert_eq!(r.mse_b1_condition, None);

        let r = StepSchedule::new(1.0, 0.7, 1.0, 0.6).validate();
        assert!(!r.exponent_chain);

        let r = StepSchedule::new(1.0, 2.0 / 3.0, 0.55, 1.0).validate();
        assert_eq!(r.mse_b1_condition, Some(false));
        assert_eq!(r.clt_b1_condition, Some(true));
    }

    #[test]
    fn checked_rejects_bad_chain() {
        assert!(StepSchedule::checked(1.0, 0.4, 1.0, 0.8).is_err());
        assert!(StepSchedule::checked(-1.0, 0.6, 1.0, 0.8).is_err());
        assert!(StepSchedule::checked(1.0, 0.6, 1.0, 0.8).is_ok());
    }

    fn valid_schedule() -> impl Strategy<Value = StepSchedule> {
        (0.01f64..10.0, 0.51f64..0.98, 0.01f64..10.0, 0.0f64..1.0).prop_map(|(a1, a, b1, t)| {
            let b = (a + 1e-3 + t * (1.0 - a - 1e-3)).min(1.0);
            StepSchedule::new(a1, a, b1, b)
        })
    }

    proptest! {
        #[test]
        fn gains_are_monotone(s in valid_schedule(), n in 1u64..10_000_000) {
            prop_assert!(s.gain_a(n + 1).unwrap() < s.gain_a(n).unwrap());
            prop_assert!(s.gain_b(n + 1) <= s.gain_b(n));
        }

        #[test]
        fn gain_a_doubling_ratio(s in valid_schedule(), n in 1u64..1_000_000_000) {
            let ratio = s.gain_a(n).unwrap() / s.gain_a(2 * n).unwrap();
            let expected = 2f64.powf(s.a_exp);
            prop_assert!((ratio - expected).abs() <= 4.0 * f64::EPSILON * expected);
        }

        #[test]
        fn validate_is_pure(s in valid_schedule()) {
            prop_assert_eq!(s.validate(), s.validate());
            prop_assert!(s.validate().is_admissible());
        }
    }
}
