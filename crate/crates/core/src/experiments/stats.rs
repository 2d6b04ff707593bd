//! Summary statistics for replicate samples.

use crate::asymptotics::Matrix2;
use crate::error::{domain, Result};

/// Least-squares fit of `log(mse) = intercept + slope · log(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits a power law through `(n, mse)` pairs in log-log space.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(domain("rate fitting needs at least 3 points"));
    }
    if let Some(&(n, m)) = points.iter().find(|(n, m)| !m.is_finite() || *m <= 0.0 || !n.is_finite() || *n <= 0.0) {
        return Err(domain(format!("rate fitting needs positive n and mse (got n={n}, mse={m})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, m)| (n.ln(), m.ln())).collect();
    let k = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("rate fitting needs at least two distinct n"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit {
        slope,
        intercept,
        r2,
    })
}

/// Mean of a sample with its standard error `sd / √R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn mean_with_stderr(values: &[f64]) -> MeanEstimate {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    MeanEstimate {
        mean,
        stderr: (var / r).sqrt(),
    }
}

/// Sample covariance of paired draws with leave-one-out jackknife
/// standard errors for each entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate {
    pub cov: Matrix2,
    pub stderr: Matrix2,
    pub replicates: usize,
}

pub const MIN_CLT_REPLICATES: usize = 30;

pub fn covariance_with_jackknife(samples: &[(f64, f64)]) -> Result<CovarianceEstimate> {
    let r = samples.len();
    if r < MIN_CLT_REPLICATES {
        return Err(domain(format!(
            "replicates >= {MIN_CLT_REPLICATES} required (got {r})"
        )));
    }
    let rf = r as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / rf;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / rf;
    let centered: Vec<[f64; 2]> = samples.iter().map(|s| [s.0 - mx, s.1 - my]).collect();

    let mut cov = [[0.0; 2]; 2];
    let mut stderr = [[0.0; 2]; 2];
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let total: f64 = centered.iter().map(|d| d[i] * d[j]).sum();
        let full = total / (rf - 1.0);
        // Leave-one-out sums of centered products: S - d_i d_j R/(R-1).
        let loo: Vec<f64> = centered
            .iter()
            .map(|d| (total - d[i] * d[j] * rf / (rf - 1.0)) / (rf - 2.0))
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / rf;
        let spread: f64 = loo.iter().map(|c| (c - loo_mean).powi(2)).sum();
        let se = ((rf - 1.0) / rf * spread).sqrt();
        cov[i][j] = full;
        cov[j][i] = full;
        stderr[i][j] = se;
        stderr[j][i] = se;
    }
    Ok(CovarianceEstimate {
        cov,
        stderr,
        replicates: r,
    })
}

/// Ratio `mean(a) / mean(b)` of paired samples with a delta-method
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub stderr: f64,
}

impl RatioEstimate {
    /// Two-sided normal interval at `z` standard errors.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.ratio - z * self.stderr, self.ratio + z * self.stderr)
    }
}

pub fn paired_ratio(a: &[f64], b: &[f64]) -> RatioEstimate {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let r = a.len() as f64;
    let ma = a.iter().sum::<f64>() / r;
    let mb = b.iter().sum::<f64>() / r;
    let ratio = ma / mb;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - ratio * y).collect();
    let spread = mean_with_stderr(&resid).stderr;
    RatioEstimate {
        ratio,
        stderr: spread / mb.abs(),
    }
}
