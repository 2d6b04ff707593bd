//! Streaming recursions for the quantile and three superquantile estimators.
//!
//! One observation drives all recursions at once:
//!
//! * Robbins–Monro quantile `θ_n` and its Cesàro average `θ̄_n`;
//! * the embedded-averaging superquantile `ϑ̂_n`, whose tail indicator is
//!   evaluated at the averaged quantile `θ̄_n`;
//! * the classical superquantile `ϑ_n`, with the indicator at `θ_n`;
//! * the convexified update `ϑ̃_n` driven by `L(θ, x) = θ + (x-θ)/(1-α) 1{x > θ}`.
//!
//! Sharing the draw across the superquantile variants gives paired
//! (common random number) comparisons for free.

use crate::error::{domain, Error, Result};
use crate::schedules::StepSchedule;

/// Running state of the joint recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEstimatorState {
    /// Observations consumed so far.
    pub n: u64,
    pub theta: f64,
    pub theta_bar: f64,
    pub sq_embedded: f64,
    pub sq_classical: f64,
    pub sq_bardou: f64,
    pub alpha: f64,
    pub schedule: StepSchedule,
}

/// One recorded checkpoint of a stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: u64,
    pub theta: f64,
    pub theta_bar: f64,
    pub sq_embedded: f64,
    pub sq_classical: f64,
    pub sq_bardou: f64,
}

impl JointEstimatorState {
    /// Starts every quantile field at `theta0` and every superquantile field
    /// at `sq0`, with no observation consumed.
    pub fn init(alpha: f64, schedule: StepSchedule, theta0: f64, sq0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain("alpha must lie in (0,1)"));
        }
        let report = schedule.validate();
        if !report.multipliers_positive {
            return Err(domain("gain multipliers a1 and b1 must be positive and finite"));
        }
        if !report.exponent_chain {
            return Err(domain(format!(
                "gain exponents must satisfy 1/2 < a < b <= 1 (got a={}, b={})",
                schedule.a_exp, schedule.b_exp
            )));
        }
        if !theta0.is_finite() || !sq0.is_finite() {
            return Err(domain("initial values must be finite"));
        }
        Ok(Self {
            n: 0,
            theta: theta0,
            theta_bar: theta0,
            sq_embedded: sq0,
            sq_classical: sq0,
            sq_bardou: sq0,
            alpha,
            schedule,
        })
    }

    /// Default initialization from a pilot observation: `θ0 = x0` and
    /// `sq0 = x0 / (1-α)`. The pilot is not counted in `n`.
    pub fn from_first_observation(alpha: f64, schedule: StepSchedule, x0: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::NonFinite { index: 0, value: x0 });
        }
        Self::init(alpha, schedule, x0, x0 / (1.0 - alpha))
    }

    /// Gains used by the next update: `(a_max(n,1), b_n)`.
    #[inline]
    pub fn next_gains(&self) -> (f64, f64) {
        let s = &self.schedule;
        let a = s.a1 * (self.n.max(1) as f64).powf(-s.a_exp);
        (a, s.gain_b(self.n))
    }

    /// Consumes one observation. Non-finite input is rejected and leaves the
    /// state untouched.
    #[inline]
    pub fn step(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                index: self.n,
                value: x,
            });
        }
        self.step_unchecked(x);
        Ok(())
    }

    #[inline]
    pub(crate) fn step_unchecked(&mut self, x: f64) {
        let (a_n, b_n) = self.next_gains();
        self.step_with_gains(x, a_n, b_n);
    }

    /// One update with gains supplied by the caller, who must pass the
    /// values of [`next_gains`](Self::next_gains).
    #[inline]
    pub(crate) fn step_with_gains(&mut self, x: f64, a_n: f64, b_n: f64) {
        let alpha = self.alpha;
        let tail = 1.0 - alpha;
        let theta_old = self.theta;
        let bar_old = self.theta_bar;
        let count = self.n as f64;

        let below = if x <= theta_old { 1.0 } else { 0.0 };
        let theta = theta_old - a_n * (below - alpha);
        debug_assert!(
            (theta - theta_old).abs()
                <= a_n * alpha.max(tail) * (1.0 + 1e-12) + 2.0 * f64::EPSILON * theta.abs().max(theta_old.abs()),
            "quantile increment exceeds its bound"
        );
        self.theta = theta;
        self.theta_bar = bar_old * count / (count + 1.0) + theta / (count + 1.0);

        let scaled = x / tail;
        let embedded_target = if x > bar_old { scaled } else { 0.0 };
        self.sq_embedded += b_n * (embedded_target - self.sq_embedded);

        let classical_target = if x > theta_old { scaled } else { 0.0 };
        self.sq_classical += b_n * (classical_target - self.sq_classical);

        self.sq_bardou += b_n * (convexified_target(theta_old, x, alpha) - self.sq_bardou);

        self.n += 1;
    }

    /// Folds [`step`](Self::step) over `observations`. On error the state
    /// holds every update before the offending observation.
    pub fn run_stream<I>(&mut self, observations: I) -> Result<()>
    where
        I: IntoIterator<Item = f64>,
    {
        for x in observations {
            self.step(x)?;
        }
        Ok(())
    }

    /// Like [`run_stream`](Self::run_stream) and records a [`TraceRow`]
    /// whenever the step counter reaches one of `checkpoints`.
    pub fn run_stream_traced<I>(&mut self, observations: I, checkpoints: &[u64]) -> Result<Vec<TraceRow>>
    where
        I: IntoIterator<Item = f64>,
    {
        let mut rows = Vec::new();
        let start = self.n;
        let mut pending = checkpoints.iter().copied().filter(|&c| c > start).peekable();
        let mut sorted = true;
        let mut last = 0;
        for &c in checkpoints {
            sorted &= c >= last;
            last = c;
        }
        if !sorted {
            return Err(domain("checkpoints must be ascending"));
        }
        for x in observations {
            self.step(x)?;
            while pending.peek() == Some(&self.n) {
                rows.push(self.row());
                pending.next();
            }
        }
        Ok(rows)
    }

    pub fn row(&self) -> TraceRow {
        TraceRow {
            n: self.n,
            theta: self.theta,
            theta_bar: self.theta_bar,
            sq_embedded: self.sq_embedded,
            sq_classical: self.sq_classical,
            sq_bardou: self.sq_bardou,
        }
    }
}

/// `L(θ, x) = θ + (x - θ)/(1-α) · 1{x > θ}`.
#[inline]
pub fn convexified_target(theta: f64, x: f64, alpha: f64) -> f64 {
    if x > theta {
        theta + (x - theta) / (1.0 - alpha)
    } else {
        theta
    }
}
