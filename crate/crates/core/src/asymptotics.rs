//! Closed-form limiting variances and first-order error terms.
//!
//! Remainder constants of the non-asymptotic bounds have no known values;
//! only their exponents are reported.

use std::fmt;

use crate::distributions::RiskOracle;
use crate::error::{domain, Result};
use crate::schedules::StepSchedule;

/// Row-major symmetric 2×2 matrix.
pub type Matrix2 = [[f64; 2]; 2];

/// Relative tolerance used to decide that the `b1` threshold sits on 1/2.
const BOUNDARY_TOL: f64 = 1e-9;

fn check_b1(b1: f64) -> Result<()> {
    if b1 > 0.5 && b1.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("b1 must exceed 1/2 (got {b1})")))
    }
}

fn non_negative(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(domain(format!("inadmissible oracle: {what} would be negative ({value})")))
    }
}

/// `α(1-α)/f(θ_α)²`: limiting variance of `√n(θ̄_n - θ_α)`.
pub fn quantile_clt_variance(oracle: &RiskOracle) -> f64 {
    let f = oracle.density_at_quantile;
    oracle.alpha * (1.0 - oracle.alpha) / (f * f)
}

/// `V_α / (2(1-α)²)`: limiting variance of `b_n^{-1/2}(ϑ̂_n - ϑ_α)` when `b < 1`.
pub fn clt_variance_slow(oracle: &RiskOracle) -> f64 {
    let tail = 1.0 - oracle.alpha;
    oracle.v_alpha / (2.0 * tail * tail)
}

/// Joint limiting covariance of `√n(θ̄_n - θ_α, ϑ̂_n - ϑ_α)` for `b = 1`.
pub fn clt_covariance_fast(oracle: &RiskOracle, b1: f64) -> Result<Matrix2> {
    check_b1(b1)?;
    let RiskOracle {
        alpha,
        theta_alpha: theta,
        vartheta_alpha: vartheta,
        density_at_quantile: f,
        v_alpha,
    } = *oracle;
    let tail = 1.0 - alpha;
    let pole = 2.0 * b1 - 1.0;
    let s11 = quantile_clt_variance(oracle);
    let s12 = alpha * (vartheta - theta) / f;
    let s22 = b1 * b1 / pole * v_alpha / (tail * tail)
        - 2.0 * b1 / pole * alpha * theta * (vartheta - theta) / tail;
    let s22 = non_negative(s22, "superquantile limiting variance")?;
    Ok([[s11, s12], [s12, s22]])
}

/// Stationary covariance of the limiting Ornstein–Uhlenbeck generator,
/// obtained from its three moment equations. Rescaled by
/// `diag(1, √b1)` on both sides it equals [`clt_covariance_fast`].
pub fn sigma_from_generator(oracle: &RiskOracle, b1: f64) -> Result<Matrix2> {
    check_b1(b1)?;
    let RiskOracle {
        alpha,
        theta_alpha: theta,
        vartheta_alpha: vartheta,
        density_at_quantile: f,
        v_alpha,
    } = *oracle;
    let tail = 1.0 - alpha;
    let xx = alpha * tail / (f * f);
    let xy = alpha * (vartheta - theta) / (f * b1.sqrt());
    let yy = 2.0 / (2.0 * b1 - 1.0)
        * (b1 * v_alpha / (2.0 * tail * tail) - alpha * theta * (vartheta - theta) / tail);
    let yy = non_negative(yy, "stationary variance")?;
    let sigma = [[xx, xy], [xy, yy]];
    debug_assert!({
        let direct = clt_covariance_fast(oracle, b1)?;
        let scaled = rescale_sigma(&sigma, b1);
        (0..2).all(|i| {
            (0..2).all(|j| {
                (direct[i][j] - scaled[i][j]).abs() <= 1e-10 * direct[i][j].abs().max(1.0)
            })
        })
    });
    Ok(sigma)
}

/// `diag(1, √b1) · Σ · diag(1, √b1)`.
pub fn rescale_sigma(sigma: &Matrix2, b1: f64) -> Matrix2 {
    let r = b1.sqrt();
    [
        [sigma[0][0], r * sigma[0][1]],
        [r * sigma[1][0], b1 * sigma[1][1]],
    ]
}

/// `C_{α,b1}`, the constant of the `C/n` mean-squared-error bound for
/// harmonic superquantile gains.
pub fn c_alpha_b1(oracle: &RiskOracle, b1: f64) -> Result<f64> {
    check_b1(b1)?;
    let alpha = oracle.alpha;
    let tail = 1.0 - alpha;
    let f = oracle.density_at_quantile;
    let pole = 2.0 * b1 - 1.0;
    let lead = 4.0 * b1 * b1 * alpha * tail / (pole * pole * f * f);
    let inner = 1.0 + oracle.v_alpha * f * f * pole / (4.0 * alpha * tail.powi(3));
    let bracket = 1.0 + inner.sqrt();
    Ok(lead * bracket * bracket)
}

/// First-order term of the embedded superquantile MSE bound after `n`
/// observations: `V_α/(2(1-α)²) · b_n` for `b < 1`, `C_{α,b1}/n` for `b = 1`.
pub fn mse_bound_embedded(oracle: &RiskOracle, schedule: &StepSchedule, n: u64) -> Result<f64> {
    if !schedule.validate().is_admissible() {
        return Err(domain("schedule violates 1/2 < a < b <= 1 or has non-positive gains"));
    }
    if n == 0 {
        return Err(domain("the bound is stated for n >= 1"));
    }
    if schedule.is_harmonic() {
        Ok(c_alpha_b1(oracle, schedule.b1)? / n as f64)
    } else {
        Ok(clt_variance_slow(oracle) * schedule.gain_b(n))
    }
}

/// Exponent `r` of the unquantified remainder `Γ n^{-r}` in the embedded
/// superquantile bound: `(b+1)/2` when `b < 1`, `(1 + a/2) ∧ (2 - a)` when `b = 1`.
pub fn embedded_remainder_exponent(schedule: &StepSchedule) -> f64 {
    if schedule.is_harmonic() {
        (1.0 + schedule.a_exp / 2.0).min(2.0 - schedule.a_exp)
    } else {
        (schedule.b_exp + 1.0) / 2.0
    }
}

/// First-order term `α(1-α)/(f(θ_α)² n)` of the averaged-quantile MSE bound.
pub fn mse_bound_averaged_quantile(oracle: &RiskOracle, schedule: &StepSchedule, n: u64) -> Result<f64> {
    if !schedule.validate().is_admissible() {
        return Err(domain("schedule violates 1/2 < a < b <= 1 or has non-positive gains"));
    }
    if n == 0 {
        return Err(domain("the bound is stated for n >= 1"));
    }
    Ok(quantile_clt_variance(oracle) / n as f64)
}

/// Exponent `(1/2 + a) ∧ (3/2 - a/2)` of the averaged-quantile remainder.
pub fn averaged_quantile_remainder_exponent(a_exp: f64) -> f64 {
    (0.5 + a_exp).min(1.5 - 0.5 * a_exp)
}

/// Predicted ordering of the embedded estimator against the classical and
/// convexified competitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// Harmonic gains: the embedded estimator has the smaller limiting
    /// variance for every `b1` in `(1/2, upper)`.
    EmbeddedCanWin { upper: f64 },
    /// The threshold sits on 1/2 (`ϑ_α/θ_α = 3/2`): no admissible `b1`
    /// gives a strict improvement.
    Boundary,
    /// The competitors have the smaller limiting variance for every
    /// admissible `b1`.
    CompetitorsWin,
    /// `θ_α <= 0` or `ϑ_α <= θ_α`: the positivity premise of the comparison
    /// does not hold, so only the direct variance comparison is meaningful.
    Degenerate,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::EmbeddedCanWin { .. } => "embedded-can-win",
            Self::Boundary => "boundary",
            Self::CompetitorsWin => "competitors-win",
            Self::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmbeddedCanWin { upper } => {
                write!(f, "embedded variant can win for b1 in (1/2, {upper:.6})")
            }
            Self::Boundary => write!(f, "boundary case: no strict ordering predicted"),
            Self::CompetitorsWin => write!(f, "competitor variants win for every admissible b1"),
            Self::Degenerate => write!(f, "degenerate oracle: positivity premise fails"),
        }
    }
}

/// Limiting-variance comparison between the embedded estimator and the
/// classical/convexified competitors, all on the `n^{-b}` scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `V_α/(1-α)² - (αθ_α/(1-α))(2ϑ_α - θ_α)`.
    pub tau_alpha_sq: f64,
    /// Competitor limiting variance: `b1²τ²/(2b1-1)` for `b = 1`, `b1τ²/2` otherwise.
    pub gamma_vartheta: f64,
    /// Embedded limiting variance on the same scale: `S²₂₂` for `b = 1`,
    /// `b1 V_α/(2(1-α)²)` otherwise.
    pub embedded_variance: f64,
    /// `1 - θ_α/(2ϑ_α - θ_α)`.
    pub b1_threshold: f64,
    /// Direct comparison `embedded_variance < gamma_vartheta` at this `b1`.
    pub embedded_smaller: bool,
    pub verdict: Verdict,
}

pub fn variance_comparison(oracle: &RiskOracle, b1: f64, b_exp: f64) -> Result<ComparisonReport> {
    let harmonic = b_exp == 1.0;
    if harmonic {
        check_b1(b1)?;
    } else if !(b1 > 0.0 && b_exp > 0.5 && b_exp < 1.0) {
        return Err(domain("need b1 > 0 and b in (1/2, 1]"));
    }
    let RiskOracle {
        alpha,
        theta_alpha: theta,
        vartheta_alpha: vartheta,
        v_alpha,
        ..
    } = *oracle;
    let tail = 1.0 - alpha;
    let tau_alpha_sq = v_alpha / (tail * tail) - alpha * theta / tail * (2.0 * vartheta - theta);
    let tau_alpha_sq = non_negative(tau_alpha_sq, "tau_alpha^2")?;
    let (gamma_vartheta, embedded_variance) = if harmonic {
        (
            b1 * b1 * tau_alpha_sq / (2.0 * b1 - 1.0),
            clt_covariance_fast(oracle, b1)?[1][1],
        )
    } else {
        (b1 * tau_alpha_sq / 2.0, b1 * clt_variance_slow(oracle))
    };
    let b1_threshold = 1.0 - theta / (2.0 * vartheta - theta);
    let verdict = if theta <= 0.0 || vartheta <= theta {
        Verdict::Degenerate
    } else if !harmonic || b1_threshold < 0.5 - BOUNDARY_TOL {
        Verdict::CompetitorsWin
    } else if b1_threshold <= 0.5 + BOUNDARY_TOL {
        Verdict::Boundary
    } else {
        Verdict::EmbeddedCanWin {
            upper: b1_threshold,
        }
    };
    Ok(ComparisonReport {
        tau_alpha_sq,
        gamma_vartheta,
        embedded_variance,
        b1_threshold,
        embedded_smaller: embedded_variance < gamma_vartheta,
        verdict,
    })
}

/// Every closed-form constant for one (distribution, level, schedule).
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub quantile_clt_var: f64,
    pub sq_var_slow: f64,
    /// Joint covariance for harmonic gains; `None` when `b1 <= 1/2`.
    pub s2: Option<Matrix2>,
    /// `None` when `b1 <= 1/2`.
    pub c_alpha_b1: Option<f64>,
    pub tau_alpha_sq: f64,
    pub gamma_vartheta: f64,
    pub b1_threshold: f64,
    pub verdict: Verdict,
    pub averaged_quantile_remainder_exponent: f64,
    pub embedded_remainder_exponent: f64,
}

impl AsymptoticReport {
    pub fn new(oracle: &RiskOracle, schedule: &StepSchedule) -> Result<Self> {
        let b1 = schedule.b1;
        let admissible = b1 > 0.5;
        let s2 = admissible.then(|| clt_covariance_fast(oracle, b1)).transpose()?;
        let c = admissible.then(|| c_alpha_b1(oracle, b1)).transpose()?;
        // Below 1/2 the harmonic comparison has no limit; report the slow branch.
        let cmp_b = if schedule.is_harmonic() && !admissible { 0.75 } else { schedule.b_exp };
        let cmp = variance_comparison(oracle, b1, cmp_b)?;
        Ok(Self {
            quantile_clt_var: quantile_clt_variance(oracle),
            sq_var_slow: clt_variance_slow(oracle),
            s2,
            c_alpha_b1: c,
            tau_alpha_sq: cmp.tau_alpha_sq,
            gamma_vartheta: cmp.gamma_vartheta,
            b1_threshold: cmp.b1_threshold,
            verdict: cmp.verdict,
            averaged_quantile_remainder_exponent: averaged_quantile_remainder_exponent(
                schedule.a_exp,
            ),
            embedded_remainder_exponent: embedded_remainder_exponent(schedule),
        })
    }

    /// Flat `(key, value)` view; absent entries render as `n/a`.
    pub fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        let s2 = |i: usize, j: usize| self.s2.map(|m| m[i][j]);
        vec![
            ("quantile_clt_var", Some(self.quantile_clt_var)),
            ("sq_var_slow", Some(self.sq_var_slow)),
            ("s2_11", s2(0, 0)),
            ("s2_12", s2(0, 1)),
            ("s2_22", s2(1, 1)),
            ("c_alpha_b1", self.c_alpha_b1),
            ("tau_alpha_sq", Some(self.tau_alpha_sq)),
            ("gamma_vartheta", Some(self.gamma_vartheta)),
            ("b1_threshold", Some(self.b1_threshold)),
            (
                "averaged_quantile_remainder_exponent",
                Some(self.averaged_quantile_remainder_exponent),
            ),
            ("embedded_remainder_exponent", Some(self.embedded_remainder_exponent)),
        ]
    }
}
