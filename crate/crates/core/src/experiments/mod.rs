//! Monte-Carlo harness for the estimators.
//!
//! Each replicate runs one stream from its own substream to the largest
//! checkpoint and records every estimate at the grid points. Replicates run
//! in parallel, but their records are reassembled in replicate order before
//! any aggregation, so results do not depend on the thread count.

mod stats;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::asymptotics::{variance_comparison, ComparisonReport, Verdict};
use crate::distributions::{DistributionModel, RiskOracle};
use crate::error::{domain, Error, Result};
use crate::estimators::JointEstimatorState;
use crate::random::RandomStream;
use crate::schedules::StepSchedule;

pub use stats::{
    covariance_with_jackknife, fit_rate, mean_with_stderr, paired_ratio, CovarianceEstimate,
    MeanEstimate, RateFit, RatioEstimate, MIN_CLT_REPLICATES,
};

/// Superquantile recursion variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Embedded,
    Classical,
    Bardou,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Embedded, Variant::Classical, Variant::Bardou];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Embedded => "embedded",
            Self::Classical => "classical",
            Self::Bardou => "bardou",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| domain(format!("unknown variant '{s}' (expected embedded, classical or bardou)")))
    }
}

/// One tracked estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    Quantile,
    AveragedQuantile,
    Superquantile(Variant),
}

impl Series {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quantile => "quantile",
            Self::AveragedQuantile => "averaged_quantile",
            Self::Superquantile(v) => v.name(),
        }
    }

    fn slot(&self) -> usize {
        match self {
            Self::Quantile => 0,
            Self::AveragedQuantile => 1,
            Self::Superquantile(Variant::Embedded) => 2,
            Self::Superquantile(Variant::Classical) => 3,
            Self::Superquantile(Variant::Bardou) => 4,
        }
    }

    fn truth(&self, oracle: &RiskOracle) -> f64 {
        match self {
            Self::Quantile | Self::AveragedQuantile => oracle.theta_alpha,
            Self::Superquantile(_) => oracle.vartheta_alpha,
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: DistributionModel,
    pub alpha: f64,
    pub schedule: StepSchedule,
    /// Strictly ascending checkpoint sizes, all at least 1.
    pub n_grid: Vec<u64>,
    pub replicates: u64,
    pub master_seed: u64,
    /// Experiment index inside the master seed's substream family.
    pub experiment: u64,
    /// Start at the oracle values instead of a pilot observation.
    pub warm_start: bool,
    pub variants: Vec<Variant>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(domain("alpha must lie in (0,1)"));
        }
        let report = self.schedule.validate();
        if !report.multipliers_positive || !report.exponent_chain {
            return Err(domain(format!(
                "schedule {} must satisfy a1, b1 > 0 and 1/2 < a < b <= 1",
                self.schedule
            )));
        }
        if self.n_grid.is_empty() {
            return Err(domain("n_grid must not be empty"));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("n_grid must be strictly ascending and start at 1 or more"));
        }
        if self.replicates < 2 {
            return Err(domain("replicates must be at least 2"));
        }
        if self.variants.is_empty() {
            return Err(domain("at least one variant is required"));
        }
        Ok(())
    }

    /// Averaged quantile followed by the configured variants.
    pub fn reported_series(&self) -> Vec<Series> {
        std::iter::once(Series::AveragedQuantile)
            .chain(self.variants.iter().map(|&v| Series::Superquantile(v)))
            .collect()
    }
}

/// Log-spaced integer grid from `lo` to `hi` with `points` entries,
/// rounded and deduplicated.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi <= lo || points < 2 {
        return Err(domain("log grid needs 1 <= lo < hi and at least 2 points"));
    }
    let (l, h) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (l + (h - l) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    grid.dedup();
    Ok(grid)
}

/// Estimates of one replicate at every checkpoint, in the slot order
/// quantile, averaged quantile, embedded, classical, convexified.
pub type CheckpointValues = [f64; 5];

/// Per-replicate checkpoint records plus the oracle they are measured
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub oracle: RiskOracle,
    /// `values[r][k]` holds replicate `r` at checkpoint `n_grid[k]`.
    pub values: Vec<Vec<CheckpointValues>>,
}

/// Mean squared error of one series at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEntry {
    pub n: u64,
    pub mse: f64,
    pub stderr: f64,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_on(config, None)
}

/// Runs on a dedicated pool of `threads` workers (all cores when `None`).
/// The thread count never changes the result.
pub fn run_experiment_on(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    config.validate()?;
    let oracle = config.model.oracle(config.alpha)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(domain("threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| domain(format!("cannot start worker pool: {e}")))?;
    let gains = GainTable::new(&config.schedule, *config.n_grid.last().unwrap());
    let records: Vec<(u64, Vec<CheckpointValues>)> = pool.install(|| {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| run_replicate(config, &oracle, &gains, r).map(|v| (r, v)))
            .collect::<Result<_>>()
    })?;
    Ok(ExperimentResult::assemble(config.clone(), oracle, records))
}

/// `(a_max(n,1), b_n)` for every step `n` below the horizon, shared by all
/// replicates.
struct GainTable {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl GainTable {
    fn new(schedule: &StepSchedule, horizon: u64) -> Self {
        let probe = JointEstimatorState::init(0.5, *schedule, 0.0, 0.0)
            .expect("schedule validated by the config");
        let (a, b) = (0..horizon)
            .map(|n| JointEstimatorState { n, ..probe }.next_gains())
            .unzip();
        Self { a, b }
    }
}

fn run_replicate(
    config: &ExperimentConfig,
    oracle: &RiskOracle,
    gains: &GainTable,
    replicate: u64,
) -> Result<Vec<CheckpointValues>> {
    let mut rng = RandomStream::substream(config.master_seed, config.experiment, replicate);
    let model = &config.model;
    let mut state = if config.warm_start {
        JointEstimatorState::init(config.alpha, config.schedule, oracle.theta_alpha, oracle.vartheta_alpha)?
    } else {
        JointEstimatorState::from_first_observation(config.alpha, config.schedule, model.sample(&mut rng))?
    };
    let mut out = Vec::with_capacity(config.n_grid.len());
    for &target in &config.n_grid {
        for n in state.n..target {
            let i = n as usize;
            state.step_with_gains(model.sample(&mut rng), gains.a[i], gains.b[i]);
        }
        let values = [
            state.theta,
            state.theta_bar,
            state.sq_embedded,
            state.sq_classical,
            state.sq_bardou,
        ];
        if let Some(slot) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                replicate,
                step: state.n,
                detail: format!("non-finite estimate in slot {slot}: {}", values[slot]),
            });
        }
        out.push(values);
    }
    Ok(out)
}

impl ExperimentResult {
    /// Orders records by replicate index, whatever order they arrived in.
    pub fn assemble(
        config: ExperimentConfig,
        oracle: RiskOracle,
        mut records: Vec<(u64, Vec<CheckpointValues>)>,
    ) -> Self {
        records.sort_by_key(|r| r.0);
        Self {
            config,
            oracle,
            values: records.into_iter().map(|r| r.1).collect(),
        }
    }

    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    pub fn checkpoint_index(&self, n: u64) -> Result<usize> {
        self.config
            .n_grid
            .iter()
            .position(|&c| c == n)
            .ok_or_else(|| domain(format!("{n} is not a checkpoint of this experiment")))
    }

    /// Replicate errors `estimate - truth` at checkpoint index `k`.
    pub fn errors(&self, series: Series, k: usize) -> Vec<f64> {
        let truth = series.truth(&self.oracle);
        let slot = series.slot();
        self.values.iter().map(|v| v[k][slot] - truth).collect()
    }

    /// Mean of `|estimate - truth|^p` with its standard error.
    pub fn abs_moment(&self, series: Series, k: usize, p: f64) -> MeanEstimate {
        let powered: Vec<f64> = self.errors(series, k).iter().map(|e| e.abs().powf(p)).collect();
        mean_with_stderr(&powered)
    }

    pub fn mse(&self, series: Series, k: usize) -> MseEntry {
        let squared: Vec<f64> = self.errors(series, k).iter().map(|e| e * e).collect();
        let m = mean_with_stderr(&squared);
        MseEntry {
            n: self.config.n_grid[k],
            mse: m.mean,
            stderr: m.stderr,
        }
    }

    pub fn mse_curve(&self, series: Series) -> Vec<MseEntry> {
        (0..self.config.n_grid.len()).map(|k| self.mse(series, k)).collect()
    }

    /// MSE curves of [`ExperimentConfig::reported_series`].
    pub fn mse_table(&self) -> Vec<(Series, Vec<MseEntry>)> {
        self.config
            .reported_series()
            .into_iter()
            .map(|s| (s, self.mse_curve(s)))
            .collect()
    }

    pub fn rate_fit(&self, series: Series) -> Result<RateFit> {
        let pts: Vec<(f64, f64)> = self
            .mse_curve(series)
            .iter()
            .map(|e| (e.n as f64, e.mse))
            .collect();
        fit_rate(&pts)
    }

    /// Rate of `E|estimate - truth|^p` against `n`.
    pub fn moment_rate_fit(&self, series: Series, p: f64) -> Result<RateFit> {
        let pts: Vec<(f64, f64)> = (0..self.config.n_grid.len())
            .map(|k| (self.config.n_grid[k] as f64, self.abs_moment(series, k, p).mean))
            .collect();
        fit_rate(&pts)
    }

    /// Rescaled pairs `(√n(θ̄_n - θ_α), r_n(ϑ̂_n - ϑ_α))` with `r_n = √n` for
    /// harmonic gains and `b_n^{-1/2}` otherwise.
    pub fn clt_samples(&self, k: usize) -> Vec<(f64, f64)> {
        let n = self.config.n_grid[k];
        let root_n = (n as f64).sqrt();
        let schedule = &self.config.schedule;
        let sq_scale = if schedule.is_harmonic() {
            root_n
        } else {
            schedule.gain_b(n).powf(-0.5)
        };
        let o = &self.oracle;
        self.values
            .iter()
            .map(|v| {
                (
                    root_n * (v[k][1] - o.theta_alpha),
                    sq_scale * (v[k][2] - o.vartheta_alpha),
                )
            })
            .collect()
    }
}

/// Sample covariance of the rescaled pair at checkpoint `n`.
pub fn empirical_clt_cov(result: &ExperimentResult, n: u64) -> Result<CovarianceEstimate> {
    let k = result.checkpoint_index(n)?;
    covariance_with_jackknife(&result.clt_samples(k))
}

/// Paired MSE ratio `numerator / denominator` at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    pub numerator: Variant,
    pub denominator: Variant,
    pub ratio: RatioEstimate,
    /// 95% normal interval.
    pub ci: (f64, f64),
    /// Whether theory predicts the numerator has the smaller limiting
    /// variance; `None` when no strict ordering is predicted.
    pub predicted_numerator_smaller: Option<bool>,
    /// Whether the observed direction matches the prediction.
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantComparison {
    /// `None` when the schedule is outside the comparison's domain.
    pub theory: Option<ComparisonReport>,
    pub rows: Vec<ComparisonRow>,
}

impl VariantComparison {
    pub fn verdict(&self) -> Option<Verdict> {
        self.theory.map(|t| t.verdict)
    }
}

const Z95: f64 = 1.959963984540054;

/// MSE ratios for every pair of configured variants at every checkpoint.
pub fn compare_variants(result: &ExperimentResult) -> Result<VariantComparison> {
    let variants = &result.config.variants;
    if variants.len() < 2 {
        return Err(domain("comparison needs at least 2 variants"));
    }
    let schedule = &result.config.schedule;
    let theory = variance_comparison(&result.oracle, schedule.b1, schedule.b_exp).ok();
    let embedded_prediction = theory.and_then(|t| match t.verdict {
        Verdict::Boundary => None,
        _ => Some(t.embedded_smaller),
    });
    let mut rows = Vec::new();
    for k in 0..result.config.n_grid.len() {
        let squared = |v: Variant| -> Vec<f64> {
            result
                .errors(Series::Superquantile(v), k)
                .iter()
                .map(|e| e * e)
                .collect()
        };
        for (i, &num) in variants.iter().enumerate() {
            for &den in &variants[i + 1..] {
                let ratio = paired_ratio(&squared(num), &squared(den));
                let predicted = match (num, den) {
                    (Variant::Embedded, _) => embedded_prediction,
                    (_, Variant::Embedded) => embedded_prediction.map(|p| !p),
                    _ => None,
                };
                rows.push(ComparisonRow {
                    n: result.config.n_grid[k],
                    numerator: num,
                    denominator: den,
                    ratio,
                    ci: ratio.interval(Z95),
                    predicted_numerator_smaller: predicted,
                    agrees: predicted.map(|p| p == (ratio.ratio < 1.0)),
                });
            }
        }
    }
    Ok(VariantComparison { theory, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_config(replicates: u64, n_grid: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            model: DistributionModel::uniform(0.0, 1.0).unwrap(),
            alpha: 0.5,
            schedule: StepSchedule::new(1.0, 2.0 / 3.0, 1.0, 1.0),
            n_grid,
            replicates,
            master_seed: 20240611,
            experiment: 0,
            warm_start: false,
            variants: Variant::ALL.to_vec(),
        }
    }

    #[test]
    fn config_validation() {
        let good = uniform_config(2, vec![10, 100]);
        assert!(good.validate().is_ok());
        let mut c = good.clone();
        c.n_grid = vec![10, 10];
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.n_grid = vec![0, 10];
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.replicates = 1;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.alpha = 1.5;
        assert_eq!(c.validate().unwrap_err().to_string(), "alpha must lie in (0,1)");
        let mut c = good;
        c.variants.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        assert_eq!(log_grid(1000, 1_000_000, 4).unwrap(), vec![1000, 10_000, 100_000, 1_000_000]);
        let g = log_grid(100, 100_000, 13).unwrap();
        assert_eq!(g.len(), 13);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(log_grid(10, 10, 3).is_err());
    }

    #[test]
    fn golden_small_run() {
        let result = run_experiment_on(&uniform_config(2, vec![10]), Some(1)).unwrap();
        // Replicate 0 was re-derived from the same draws by an independent script.
        let expected: [[f64; 5]; 2] = [
            [
                0.6936133896403309,
                0.7275818805398621,
                0.32311952806291466,
                0.7287748898320093,
                0.8577581008359181,
            ],
            [
                0.36037704321068165,
                0.2409237004772296,
                0.4956331950172618,
                0.47263427775490324,
                0.6448632003090533,
            ],
        ];
        for r in 0..2 {
            assert_eq!(result.values[r][0], expected[r], "replicate {r}");
        }
    }

    #[test]
    fn replicate_matches_hand_driven_stream() {
        let config = uniform_config(2, vec![10]);
        let result = run_experiment_on(&config, Some(1)).unwrap();
        let mut rng = RandomStream::substream(config.master_seed, 0, 1);
        let model = config.model;
        let x0 = model.sample(&mut rng);
        let mut state = JointEstimatorState::from_first_observation(0.5, config.schedule, x0).unwrap();
        let draws: Vec<f64> = (0..10).map(|_| model.sample(&mut rng)).collect();
        let rows = state.run_stream_traced(draws, &[10]).unwrap();
        let r = rows[0];
        assert_eq!(
            result.values[1][0],
            [r.theta, r.theta_bar, r.sq_embedded, r.sq_classical, r.sq_bardou]
        );
    }

    #[test]
    fn warm_single_step_is_hand_checkable() {
        let mut config = uniform_config(2, vec![1]);
        config.warm_start = true;
        let result = run_experiment(&config).unwrap();
        let samples = result.clt_samples(0);
        for r in 0..2 {
            let x = RandomStream::substream(config.master_seed, 0, r as u64).uniform();
            // One step from (0.5, 0.75) with a_1 = 1 and b_0 = 1.
            let theta = 0.5 - (if x <= 0.5 { 1.0 } else { 0.0 } - 0.5);
            let theta_bar = theta;
            let sq = if x > 0.5 { 2.0 * x } else { 0.0 };
            assert_eq!(samples[r].0, theta_bar - 0.5);
            assert_eq!(samples[r].1, sq - 0.75);
            assert_eq!(result.values[r][0][0], theta);
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let mut config = uniform_config(24, vec![10, 100, 1000]);
        config.model = DistributionModel::pareto(1.0, 2.5).unwrap();
        config.alpha = 0.9;
        let one = run_experiment_on(&config, Some(1)).unwrap();
        let many = run_experiment_on(&config, Some(4)).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn assembly_ignores_arrival_order() {
        let config = uniform_config(6, vec![10, 50]);
        let result = run_experiment(&config).unwrap();
        let mut records: Vec<(u64, Vec<CheckpointValues>)> = result
            .values
            .iter()
            .cloned()
            .enumerate()
            .map(|(r, v)| (r as u64, v))
            .collect();
        records.reverse();
        records.swap(1, 4);
        let again = ExperimentResult::assemble(config, result.oracle, records);
        assert_eq!(again, result);
    }

    #[test]
    fn mse_table_shape() {
        let config = uniform_config(8, vec![10, 100, 1000]);
        let result = run_experiment(&config).unwrap();
        let table = result.mse_table();
        assert_eq!(table.len(), 4);
        for (_, curve) in &table {
            assert_eq!(curve.iter().map(|e| e.n).collect::<Vec<_>>(), vec![10, 100, 1000]);
            assert!(curve.iter().all(|e| e.mse >= 0.0 && e.stderr >= 0.0));
        }
        let fit = result.rate_fit(Series::Superquantile(Variant::Embedded)).unwrap();
        assert!((0.0..=1.0).contains(&fit.r2));
    }

    #[test]
    fn clt_cov_needs_thirty_replicates() {
        let result = run_experiment(&uniform_config(10, vec![100])).unwrap();
        assert!(empirical_clt_cov(&result, 100).is_err());
        assert!(empirical_clt_cov(&result, 99).is_err());
    }

    #[test]
    fn identical_columns_give_unit_ratios() {
        // Embedded and classical coincide on the first step from a shared start.
        let mut config = uniform_config(40, vec![1]);
        config.warm_start = true;
        config.variants = vec![Variant::Embedded, Variant::Classical];
        let result = run_experiment(&config).unwrap();
        let cmp = compare_variants(&result).unwrap();
        assert_eq!(cmp.rows.len(), 1);
        assert_eq!(cmp.rows[0].ratio.ratio, 1.0);
        assert_eq!(cmp.rows[0].ci, (1.0, 1.0));
    }

    #[test]
    fn uniform_comparison_is_boundary() {
        let result = run_experiment(&uniform_config(4, vec![10])).unwrap();
        let cmp = compare_variants(&result).unwrap();
        assert_eq!(cmp.verdict(), Some(Verdict::Boundary));
        assert!(cmp.rows.iter().all(|r| r.agrees.is_none()));
        assert_eq!(cmp.rows.len(), 3);
    }

    #[test]
    fn comparison_needs_two_variants() {
        let mut config = uniform_config(4, vec![10]);
        config.variants = vec![Variant::Bardou];
        let result = run_experiment(&config).unwrap();
        assert!(compare_variants(&result).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("other".parse::<Variant>().is_err());
    }
}
