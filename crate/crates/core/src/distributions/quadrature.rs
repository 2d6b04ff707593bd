//! Numerical integration and root bracketing used by the brute-force oracle.
//!
//! Finite intervals use globally adaptive 15-point Gauss–Kronrod; half-lines
//! use the exp-sinh (double-exponential) substitution, which tolerates the
//! slow algebraic decay of heavy-tailed integrands without truncation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over the finite interval `[lo, hi]` to relative tolerance
/// `rel_tol`, returning `(value, error_estimate)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    quantity: &'static str,
) -> Result<(f64, f64)> {
    if lo == hi {
        return Ok((0.0, 0.0));
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&f, lo, hi);
    let mut total = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > rel_tol * total.abs().max(f64::MIN_POSITIVE) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                quantity,
                achieved: error / total.abs(),
                target: rel_tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod15(&f, worst.lo, mid);
        let right = kronrod15(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if !total.is_finite() {
            return Err(Error::Quadrature {
                quantity,
                achieved: f64::INFINITY,
                target: rel_tol,
            });
        }
    }
    // Re-sum to shed the drift of the incremental updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok((value, error))
}

/// Integrates `f` over `[lo, ∞)` with the exp-sinh substitution
/// `x = lo + exp(π/2 · sinh t)`, halving the trapezoid step until two
/// consecutive levels agree to `rel_tol`.
pub fn exp_sinh<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    rel_tol: f64,
    quantity: &'static str,
) -> Result<(f64, f64)> {
    use std::f64::consts::FRAC_PI_2;
    const MAX_LEVEL: u32 = 12;
    const T_MAX: f64 = 10.0;

    let term = |t: f64| -> Option<f64> {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        let x = lo + e;
        if !x.is_finite() {
            return None;
        }
        let w = FRAC_PI_2 * t.cosh() * e;
        if w == 0.0 {
            return None;
        }
        let v = f(x) * w;
        v.is_finite().then_some(v)
    };

    // Sum of terms at t = offset + k*step, walking outward in both
    // directions until they become negligible.
    let sweep = |offset: f64, step: f64, scale: f64| -> f64 {
        let mut sum = 0.0;
        for dir in [1.0, -1.0] {
            let mut k = 0u32;
            loop {
                let t = dir * (offset + k as f64 * step);
                if t.abs() > T_MAX {
                    break;
                }
                match term(t) {
                    Some(v) => {
                        sum += v;
                        if v.abs() <= 1e-18 * (scale + sum.abs()) && k > 2 {
                            break;
                        }
                    }
                    None => break,
                }
                k += 1;
            }
        }
        sum
    };

    let mut h = 1.0;
    let mut sum = term(0.0).unwrap_or(0.0) + sweep(1.0, 1.0, 0.0);
    let mut estimate = h * sum;
    let mut achieved = f64::INFINITY;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        sum += sweep(h, 2.0 * h, sum.abs());
        let refined = h * sum;
        achieved = (refined - estimate).abs();
        estimate = refined;
        if achieved <= rel_tol * estimate.abs() {
            return Ok((estimate, achieved));
        }
    }
    Err(Error::Quadrature {
        quantity,
        achieved: achieved / estimate.abs(),
        target: rel_tol,
    })
}

/// Bisection for `cdf(x) = target` on a bracket `[lo, hi]` with
/// `cdf(lo) <= target <= cdf(hi)`; runs until the bracket cannot shrink.
pub fn bisect<F: Fn(f64) -> f64>(cdf: F, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (cdf(lo) - target).abs() <= (cdf(hi) - target).abs() {
        lo
    } else {
        hi
    }
}
