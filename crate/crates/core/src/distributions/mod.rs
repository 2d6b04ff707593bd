//! Samplable distribution models and their exact risk quantities.
//!
//! [`DistributionModel::oracle`] evaluates the quantile, superquantile,
//! density at the quantile and tail variance `V_α = Var(X 1{X > θ_α})` in
//! closed form. [`DistributionModel::numeric_oracle`] recomputes the same
//! quantities by CDF bisection and quadrature and serves as its cross-check.

mod quadrature;

pub use quadrature::{bisect, exp_sinh, gauss_kronrod};

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{domain, Error, Result};
use crate::random::RandomStream;

const QUAD_TOL: f64 = 1e-13;

/// A continuous distribution satisfying the density assumptions of the
/// recursions: positive density at every interior quantile, bounded density
/// and a moment of order strictly above two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionModel {
    Gaussian { mean: f64, std_dev: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Pareto { scale: f64, shape: f64 },
}

impl DistributionModel {
    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        Self::Gaussian { mean, std_dev }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        Self::Pareto { scale, shape }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of each kind.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Self::Gaussian { mean, std_dev } => {
                if !finite(&[mean, std_dev]) || std_dev <= 0.0 {
                    return Err(domain("gaussian requires finite mean and stddev > 0"));
                }
            }
            Self::Exponential { rate } => {
                if !finite(&[rate]) || rate <= 0.0 {
                    return Err(domain("exponential requires rate > 0"));
                }
            }
            Self::Uniform { lo, hi } => {
                if !finite(&[lo, hi]) || lo >= hi {
                    return Err(domain("uniform requires finite lo < hi"));
                }
            }
            Self::Pareto { scale, shape } => {
                if !finite(&[scale, shape]) || scale <= 0.0 {
                    return Err(domain("pareto requires scale > 0"));
                }
                if shape <= 2.0 {
                    return Err(domain("pareto requires shape > 2 (finite moment of order > 2)"));
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Exponential { .. } => "exponential",
            Self::Uniform { .. } => "uniform",
            Self::Pareto { .. } => "pareto",
        }
    }

    /// One i.i.d. draw.
    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            Self::Gaussian { mean, std_dev } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std_dev * z
            }
            Self::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
            Self::Pareto { scale, shape } => scale * (1.0 - rng.uniform()).powf(-1.0 / shape),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std_dev } => 0.5 * erfc(-(x - mean) / (std_dev * SQRT_2)),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Pareto { scale, shape } => {
                if x <= scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(shape)
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * PI).sqrt())
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::Pareto { scale, shape } => {
                if x < scale {
                    0.0
                } else {
                    shape * scale.powf(shape) / x.powf(shape + 1.0)
                }
            }
        }
    }

    /// Closed-form inverse CDF on `(0, 1)`.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std_dev } => mean + std_dev * standard_normal_quantile(p),
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
            Self::Uniform { lo, hi } => lo + p * (hi - lo),
            Self::Pareto { scale, shape } => scale * (1.0 - p).powf(-1.0 / shape),
        }
    }

    /// `E[X]`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Pareto { scale, shape } => shape * scale / (shape - 1.0),
        }
    }

    /// `(E[X 1{X > θ}], E[X² 1{X > θ}])` in closed form.
    fn tail_moments(&self, theta: f64, alpha: f64) -> (f64, f64) {
        match *self {
            Self::Gaussian { mean, std_dev } => {
                let z = (theta - mean) / std_dev;
                let phi = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
                let tail = 1.0 - alpha;
                let m1 = mean * tail + std_dev * phi;
                let m2 = mean * mean * tail
                    + 2.0 * mean * std_dev * phi
                    + std_dev * std_dev * (z * phi + tail);
                (m1, m2)
            }
            Self::Exponential { rate } => {
                let survival = (-rate * theta).exp();
                let m1 = (theta + 1.0 / rate) * survival;
                let m2 = (theta * theta + 2.0 * theta / rate + 2.0 / (rate * rate)) * survival;
                (m1, m2)
            }
            Self::Uniform { lo, hi } => {
                let width = hi - lo;
                let m1 = (hi * hi - theta * theta) / (2.0 * width);
                let m2 = (hi.powi(3) - theta.powi(3)) / (3.0 * width);
                (m1, m2)
            }
            Self::Pareto { scale, shape } => {
                let k = shape;
                let c = k * scale.powf(k);
                let m1 = c * theta.powf(1.0 - k) / (k - 1.0);
                let m2 = c * theta.powf(2.0 - k) / (k - 2.0);
                (m1, m2)
            }
        }
    }

    /// Exact risk quantities at level `alpha`.
    pub fn oracle(&self, alpha: f64) -> Result<RiskOracle> {
        check_alpha(alpha)?;
        self.validate()?;
        let theta = self.inverse_cdf(alpha);
        let (m1, m2) = self.tail_moments(theta, alpha);
        let vartheta = match *self {
            Self::Gaussian { mean, std_dev } => {
                let z = (theta - mean) / std_dev;
                mean + std_dev * (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * (1.0 - alpha))
            }
            Self::Exponential { rate } => theta + 1.0 / rate,
            Self::Uniform { hi, .. } => 0.5 * (theta + hi),
            Self::Pareto { shape, .. } => theta * shape / (shape - 1.0),
        };
        RiskOracle::new(alpha, theta, vartheta, self.pdf(theta), m2 - m1 * m1)
    }

    /// Brute-force risk quantities: bisection on the CDF for the quantile and
    /// quadrature of `x f(x)` and `x² f(x)` above it.
    pub fn numeric_oracle(&self, alpha: f64) -> Result<RiskOracle> {
        check_alpha(alpha)?;
        self.validate()?;
        let cdf = |x: f64| self.cdf(x);
        let (lo, hi) = self.bracket(alpha);
        let theta = bisect(cdf, lo, hi, alpha);
        let residual = (cdf(theta) - alpha).abs();
        if residual >= 1e-12 {
            return Err(Error::Quadrature {
                quantity: "quantile bisection",
                achieved: residual,
                target: 1e-12,
            });
        }
        let first = |x: f64| x * self.pdf(x);
        let second = |x: f64| x * x * self.pdf(x);
        let (m1, m2) = match *self {
            Self::Uniform { hi, .. } => (
                gauss_kronrod(first, theta, hi, QUAD_TOL, "first tail moment")?.0,
                gauss_kronrod(second, theta, hi, QUAD_TOL, "second tail moment")?.0,
            ),
            _ => (
                exp_sinh(first, theta, QUAD_TOL, "first tail moment")?.0,
                exp_sinh(second, theta, QUAD_TOL, "second tail moment")?.0,
            ),
        };
        RiskOracle::new(alpha, theta, m1 / (1.0 - alpha), self.pdf(theta), m2 - m1 * m1)
    }

    /// A bracket `[lo, hi]` with `F(lo) <= p <= F(hi)`, grown by doubling
    /// from the location/scale of the model.
    fn bracket(&self, p: f64) -> (f64, f64) {
        let (mut lo, mut hi) = match *self {
            Self::Uniform { lo, hi } => return (lo, hi),
            Self::Gaussian { mean, std_dev } => (mean - std_dev, mean + std_dev),
            Self::Exponential { rate } => (0.0, 1.0 / rate),
            Self::Pareto { scale, .. } => (scale, 2.0 * scale),
        };
        let mut width = hi - lo;
        while self.cdf(lo) > p {
            lo -= width;
            width *= 2.0;
        }
        while self.cdf(hi) < p {
            hi += width;
            width *= 2.0;
        }
        (lo, hi)
    }
}

/// `Φ⁻¹(p)` for the standard normal.
pub fn standard_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("alpha must lie in (0,1)"))
    }
}

impl fmt::Display for DistributionModel {
    /// Formats as `kind:p1,p2`, the inverse of [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Gaussian { mean, std_dev } => write!(f, "gaussian:{mean},{std_dev}"),
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Self::Pareto { scale, shape } => write!(f, "pareto:{scale},{shape}"),
        }
    }
}

impl FromStr for DistributionModel {
    type Err = Error;

    /// Accepts positional `uniform:0,1` or named `exponential rate=1.0`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = match s.find([':', ' ', '\t']) {
            Some(i) => (&s[..i], s[i + 1..].trim()),
            None => (s, ""),
        };
        let kind = kind.to_ascii_lowercase();
        let names: &[&str] = match kind.as_str() {
            "gaussian" | "normal" => &["mean", "stddev"],
            "exponential" | "exp" => &["rate"],
            "uniform" => &["lo", "hi"],
            "pareto" => &["scale", "shape"],
            other => return Err(domain(format!("unknown distribution kind `{other}`"))),
        };
        let mut values: Vec<Option<f64>> = vec![None; names.len()];
        let tokens = rest
            .split([',', ' ', '\t'])
            .map(str::trim)
            .filter(|t| !t.is_empty());
        for (pos, token) in tokens.enumerate() {
            let (slot, raw) = match token.split_once('=') {
                Some((name, raw)) => {
                    let name = name.trim().to_ascii_lowercase();
                    let name = if name == "std_dev" || name == "sd" { "stddev".into() } else { name };
                    let slot = names.iter().position(|n| *n == name).ok_or_else(|| {
                        domain(format!("unknown parameter `{name}` for {kind}"))
                    })?;
                    (slot, raw.trim())
                }
                None if pos < names.len() => (pos, token),
                None => return Err(domain(format!("too many parameters for {kind}"))),
            };
            let v: f64 = raw
                .parse()
                .map_err(|_| domain(format!("cannot parse `{raw}` as a number")))?;
            values[slot] = Some(v);
        }
        let get = |i: usize| {
            values[i].ok_or_else(|| domain(format!("{kind} requires parameter `{}`", names[i])))
        };
        match kind.as_str() {
            "gaussian" | "normal" => Self::gaussian(get(0)?, get(1)?),
            "exponential" | "exp" => Self::exponential(get(0)?),
            "uniform" => Self::uniform(get(0)?, get(1)?),
            _ => Self::pareto(get(0)?, get(1)?),
        }
    }
}

/// Exact risk quantities of a distribution at level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskOracle {
    pub alpha: f64,
    /// α-quantile (value at risk).
    pub theta_alpha: f64,
    /// α-superquantile `E[X | X >= θ_α]` (expected shortfall).
    pub vartheta_alpha: f64,
    /// Density at the quantile, `f(θ_α)`.
    pub density_at_quantile: f64,
    /// `Var(X 1{X > θ_α})`.
    pub v_alpha: f64,
}

impl RiskOracle {
    /// Validating constructor, also used for synthetic oracles in tests.
    pub fn new(
        alpha: f64,
        theta_alpha: f64,
        vartheta_alpha: f64,
        density_at_quantile: f64,
        v_alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if ![theta_alpha, vartheta_alpha, density_at_quantile, v_alpha]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(domain("oracle quantities must be finite"));
        }
        if density_at_quantile <= 0.0 {
            return Err(domain("density at the quantile must be positive"));
        }
        if v_alpha < 0.0 {
            return Err(domain("V_alpha must be non-negative"));
        }
        Ok(Self {
            alpha,
            theta_alpha,
            vartheta_alpha,
            density_at_quantile,
            v_alpha,
        })
    }

    /// Largest componentwise discrepancy against `other`, measured as
    /// `|a - b| / max(1, |a|)` over quantile, superquantile, density and `V_α`.
    pub fn discrepancy(&self, other: &RiskOracle) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        rel(self.theta_alpha, other.theta_alpha)
            .max(rel(self.vartheta_alpha, other.vartheta_alpha))
            .max(rel(self.density_at_quantile, other.density_at_quantile))
            .max(rel(self.v_alpha, other.v_alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [f64; 7] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

    fn menu() -> Vec<DistributionModel> {
        vec![
            DistributionModel::gaussian(0.0, 1.0).unwrap(),
            DistributionModel::gaussian(2.0, 3.0).unwrap(),
            DistributionModel::exponential(1.0).unwrap(),
            DistributionModel::exponential(2.5).unwrap(),
            DistributionModel::uniform(0.0, 1.0).unwrap(),
            DistributionModel::uniform(-3.0, 5.0).unwrap(),
            DistributionModel::pareto(1.0, 3.0).unwrap(),
            DistributionModel::pareto(1.0, 2.2).unwrap(),
            DistributionModel::pareto(0.5, 4.0).unwrap(),
        ]
    }

    #[test]
    fn uniform_median_example() {
        let o = DistributionModel::uniform(0.0, 1.0).unwrap().oracle(0.5).unwrap();
        assert_eq!(o.theta_alpha, 0.5);
        assert_eq!(o.vartheta_alpha, 0.75);
        assert_eq!(o.density_at_quantile, 1.0);
        // 7/24 - 9/64 = 29/192
        assert!((o.v_alpha - 29.0 / 192.0).abs() < 1e-16);
    }

    #[test]
    fn exponential_examples() {
        let m = DistributionModel::exponential(1.0).unwrap();
        let o = m.oracle(0.9).unwrap();
        assert!((o.theta_alpha - 10f64.ln()).abs() < 1e-15);
        assert!((o.vartheta_alpha - 3.302_585_092_994_046).abs() < 1e-14);
        // V_α = (θ²+2θ+2)e^{-θ} - ((θ+1)e^{-θ})², 40-digit evaluation
        assert!((o.v_alpha - 1.081_636_146_681_984).abs() < 1e-14);
        let n = m.numeric_oracle(0.9).unwrap();
        assert!(o.discrepancy(&n) < 1e-10);
    }

    #[test]
    fn numeric_oracle_examples() {
        let u = DistributionModel::uniform(0.0, 1.0).unwrap().numeric_oracle(0.25).unwrap();
        assert!((u.theta_alpha - 0.25).abs() < 1e-12);

        let g = DistributionModel::gaussian(0.0, 1.0).unwrap().numeric_oracle(0.95).unwrap();
        // φ(Φ⁻¹(0.95))/0.05 with a 40-digit normal pdf
        assert!((g.theta_alpha - 1.644_853_626_951_472_7).abs() < 1e-9);
        assert!((g.vartheta_alpha - 2.062_712_807_507_426).abs() < 1e-9);

        let p = DistributionModel::pareto(1.0, 3.0).unwrap().numeric_oracle(0.9).unwrap();
        assert!((p.vartheta_alpha / p.theta_alpha - 1.5).abs() < 1e-10);
        let p = DistributionModel::pareto(1.0, 3.0).unwrap().oracle(0.9).unwrap();
        assert!((p.vartheta_alpha / p.theta_alpha - 1.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_numeric_oracle_on_grid() {
        for m in menu() {
            for &alpha in &GRID {
                let exact = m.oracle(alpha).unwrap();
                let brute = m.numeric_oracle(alpha).unwrap();
                let d = exact.discrepancy(&brute);
                assert!(d < 1e-8, "{m} alpha={alpha}: discrepancy {d:e}");
                assert!((m.cdf(exact.theta_alpha) - alpha).abs() < 1e-10, "{m} {alpha}");
            }
        }
    }

    #[test]
    fn oracle_invariants_and_monotonicity() {
        for m in menu() {
            let oracles: Vec<_> = GRID.iter().map(|&a| m.oracle(a).unwrap()).collect();
            for o in &oracles {
                assert!(o.vartheta_alpha >= o.theta_alpha);
                assert!(o.v_alpha >= 0.0);
            }
            for w in oracles.windows(2) {
                assert!(w[1].theta_alpha > w[0].theta_alpha, "{m}");
                assert!(w[1].vartheta_alpha > w[0].vartheta_alpha, "{m}");
            }
        }
    }

    #[test]
    fn gaussian_affine_equivariance() {
        let std = DistributionModel::gaussian(0.0, 1.0).unwrap();
        let moved = DistributionModel::gaussian(2.0, 3.0).unwrap();
        for &alpha in &GRID {
            let a = std.oracle(alpha).unwrap();
            let b = moved.oracle(alpha).unwrap();
            assert!((b.theta_alpha - (2.0 + 3.0 * a.theta_alpha)).abs() < 1e-12);
            assert!((b.vartheta_alpha - (2.0 + 3.0 * a.vartheta_alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let m = DistributionModel::uniform(0.0, 1.0).unwrap();
        for alpha in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            let err = m.oracle(alpha).unwrap_err();
            assert_eq!(err.to_string(), "alpha must lie in (0,1)");
            assert!(m.numeric_oracle(alpha).is_err());
        }
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(DistributionModel::gaussian(0.0, 0.0).is_err());
        assert!(DistributionModel::exponential(-1.0).is_err());
        assert!(DistributionModel::uniform(1.0, 1.0).is_err());
        assert!(DistributionModel::pareto(1.0, 2.0).is_err());
        assert!(DistributionModel::pareto(0.0, 3.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let m = DistributionModel::uniform(0.0, 1.0).unwrap();
        let a = m.sample(&mut RandomStream::from_seed(42));
        let b = m.sample(&mut RandomStream::from_seed(42));
        assert_eq!(a, b);
        assert!((0.0..1.0).contains(&a));
    }

    #[test]
    fn sample_means_match_analytic_means() {
        let mut rng = RandomStream::from_seed(2024);
        let n = 1_000_000;
        let e = DistributionModel::exponential(1.0).unwrap();
        let mean = (0..n).map(|_| e.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "{mean}");
        let p = DistributionModel::pareto(1.0, 3.0).unwrap();
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.5).abs() < 0.01, "{mean}");
        assert_eq!(p.mean(), 1.5);
    }

    #[test]
    fn parse_and_display() {
        let m: DistributionModel = "uniform:0,1".parse().unwrap();
        assert_eq!(m, DistributionModel::Uniform { lo: 0.0, hi: 1.0 });
        let m: DistributionModel = "exponential rate=1.0".parse().unwrap();
        assert_eq!(m, DistributionModel::Exponential { rate: 1.0 });
        let m: DistributionModel = "pareto shape=2.2 scale=1".parse().unwrap();
        assert_eq!(m, DistributionModel::Pareto { scale: 1.0, shape: 2.2 });
        let m: DistributionModel = "gaussian:2,3".parse().unwrap();
        assert_eq!(m.to_string().parse::<DistributionModel>().unwrap(), m);
        assert!("cauchy:0,1".parse::<DistributionModel>().is_err());
        assert!("uniform:0".parse::<DistributionModel>().is_err());
        assert!("pareto:1,1.5".parse::<DistributionModel>().is_err());
    }
}
