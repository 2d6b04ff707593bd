//! The five subcommands. Each returns its files and a stdout summary
//! without touching the filesystem.

use std::fmt::Write;

use streamrisk::asymptotics::{
    clt_covariance_fast, clt_variance_slow, mse_bound_averaged_quantile, mse_bound_embedded,
    quantile_clt_variance, variance_comparison, AsymptoticReport,
};
use streamrisk::experiments::{
    compare_variants, empirical_clt_cov, run_experiment_on, ExperimentConfig, ExperimentResult,
    Series, Variant, MIN_CLT_REPLICATES,
};
use streamrisk::RiskOracle;

use crate::config::header;
use crate::svg::{self, Curve};
use crate::table::{self, AsymptoticsRow, CltRow, CompareRow, MseRow, OracleRow, RateFitRow};
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub stdout: String,
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), table::fmt_num)
}

pub fn oracle(config: &ExperimentConfig) -> Result<Output, CliError> {
    let exact = config.model.oracle(config.alpha)?;
    let brute = config.model.numeric_oracle(config.alpha)?;
    let discrepancy = exact.discrepancy(&brute);
    let row = |source: &str, o: &RiskOracle| OracleRow {
        source: source.into(),
        theta: o.theta_alpha,
        vartheta: o.vartheta_alpha,
        density: o.density_at_quantile,
        v_alpha: o.v_alpha,
        ratio: o.vartheta_alpha / o.theta_alpha,
        discrepancy,
    };
    let rows = vec![row("closed_form", &exact), row("numeric", &brute)];
    let mut stdout = String::new();
    let _ = writeln!(
        stdout,
        "{:<12} {:>22} {:>22} {:>22} {:>22} {:>22}",
        "source", "theta", "vartheta", "density", "v_alpha", "vartheta/theta"
    );
    for r in &rows {
        let _ = writeln!(
            stdout,
            "{:<12} {:>22} {:>22} {:>22} {:>22} {:>22}",
            r.source, r.theta, r.vartheta, r.density, r.v_alpha, r.ratio
        );
    }
    let _ = writeln!(stdout, "discrepancy {discrepancy:e}");
    Ok(Output {
        files: vec![("oracle.csv".into(), table::emit(&header("oracle", config), &rows)?)],
        stdout,
    })
}

pub fn asymptotics(config: &ExperimentConfig) -> Result<Output, CliError> {
    let oracle = config.model.oracle(config.alpha)?;
    let report = AsymptoticReport::new(&oracle, &config.schedule)?;
    let mut rows: Vec<AsymptoticsRow> = report
        .entries()
        .into_iter()
        .map(|(k, v)| AsymptoticsRow {
            quantity: k.into(),
            value: na(v),
        })
        .collect();
    rows.push(AsymptoticsRow {
        quantity: "verdict".into(),
        value: report.verdict.label().into(),
    });
    let mut stdout = String::new();
    for r in &rows {
        let _ = writeln!(stdout, "{:<40} {}", r.quantity, r.value);
    }
    let _ = writeln!(stdout, "{}", report.verdict);
    Ok(Output {
        files: vec![("asymptotics.csv".into(), table::emit(&header("asymptotics", config), &rows)?)],
        stdout,
    })
}

fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult, CliError> {
    config.validate()?;
    run_experiment_on(config, threads).map_err(|e| CliError::runtime(e.to_string()))
}

/// First-order MSE curve of a series, where theory provides one.
fn theory_mse(config: &ExperimentConfig, oracle: &RiskOracle, series: Series, n: u64) -> Option<f64> {
    let s = &config.schedule;
    match series {
        Series::Quantile => None,
        Series::AveragedQuantile => mse_bound_averaged_quantile(oracle, s, n).ok(),
        Series::Superquantile(Variant::Embedded) => mse_bound_embedded(oracle, s, n).ok(),
        Series::Superquantile(_) => variance_comparison(oracle, s.b1, s.b_exp)
            .ok()
            .map(|c| c.gamma_vartheta * (n as f64).powf(-s.b_exp)),
    }
}

fn theory_slope(config: &ExperimentConfig, series: Series) -> f64 {
    match series {
        Series::Quantile | Series::AveragedQuantile => -1.0,
        Series::Superquantile(_) => -config.schedule.b_exp,
    }
}

pub fn rates(config: &ExperimentConfig, threads: Option<usize>) -> Result<Output, CliError> {
    let result = run(config, threads)?;
    let head = header("rates", config);
    let mut mse_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut curves = Vec::new();
    let mut stdout = String::new();
    for (series, curve) in result.mse_table() {
        for e in &curve {
            mse_rows.push(MseRow {
                variant: series.name().into(),
                n: e.n,
                mse: e.mse,
                stderr: e.stderr,
                theory_first_order: theory_mse(config, &result.oracle, series, e.n),
            });
        }
        let fit = result.rate_fit(series).ok();
        fit_rows.push(RateFitRow {
            variant: series.name().into(),
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            r2: fit.map(|f| f.r2),
            theory_slope: theory_slope(config, series),
        });
        let _ = writeln!(
            stdout,
            "{:<18} slope {:>10} r2 {:>10} (theory {})",
            series.name(),
            fit.map_or("n/a".into(), |f| format!("{:.4}", f.slope)),
            fit.map_or("n/a".into(), |f| format!("{:.4}", f.r2)),
            theory_slope(config, series)
        );
        curves.push(Curve {
            label: series.name().into(),
            points: curve.iter().map(|e| (e.n as f64, e.mse)).collect(),
            dashed: false,
        });
        let theory: Vec<(f64, f64)> = curve
            .iter()
            .filter_map(|e| theory_mse(config, &result.oracle, series, e.n).map(|t| (e.n as f64, t)))
            .collect();
        if !theory.is_empty() {
            curves.push(Curve {
                label: format!("{} (theory)", series.name()),
                points: theory,
                dashed: true,
            });
        }
    }
    let plot = svg::log_log(&format!("MSE, {}", config.model), "n", "MSE", &curves);
    Ok(Output {
        files: vec![
            ("mse.csv".into(), table::emit(&head, &mse_rows)?),
            ("ratefit.csv".into(), table::emit(&head, &fit_rows)?),
            ("rates.svg".into(), plot),
        ],
        stdout,
    })
}

pub fn clt(config: &ExperimentConfig, threads: Option<usize>) -> Result<Output, CliError> {
    if config.replicates < MIN_CLT_REPLICATES as u64 {
        return Err(CliError::usage(format!(
            "replicates ≥ {MIN_CLT_REPLICATES} required (got {})",
            config.replicates
        )));
    }
    let result = run(config, threads)?;
    let oracle = &result.oracle;
    let s = &config.schedule;
    let joint = if s.is_harmonic() {
        clt_covariance_fast(oracle, s.b1).ok()
    } else {
        None
    };
    let (t12, t22) = if s.is_harmonic() {
        (joint.map(|m| m[0][1]), joint.map(|m| m[1][1]))
    } else {
        (None, Some(clt_variance_slow(oracle)))
    };
    let mut rows = Vec::new();
    let mut stdout = String::new();
    for &n in &config.n_grid {
        let est = empirical_clt_cov(&result, n)?;
        rows.push(CltRow {
            n,
            s2_11: est.cov[0][0],
            s2_12: est.cov[0][1],
            s2_22: est.cov[1][1],
            se_11: est.stderr[0][0],
            se_12: est.stderr[0][1],
            se_22: est.stderr[1][1],
            theory_11: Some(quantile_clt_variance(oracle)),
            theory_12: t12,
            theory_22: t22,
        });
        let _ = writeln!(
            stdout,
            "n={n:<10} S11 {:.5}±{:.5}  S12 {:.5}±{:.5}  S22 {:.5}±{:.5}",
            est.cov[0][0], est.stderr[0][0], est.cov[0][1], est.stderr[0][1], est.cov[1][1], est.stderr[1][1]
        );
    }
    let _ = writeln!(
        stdout,
        "theory     S11 {}  S12 {}  S22 {}",
        quantile_clt_variance(oracle),
        na(t12),
        na(t22)
    );
    let last = config.n_grid.len() - 1;
    let plot = svg::scatter_with_ellipse(
        &format!("Rescaled errors at n={}", config.n_grid[last]),
        "averaged quantile",
        "embedded superquantile",
        &result.clt_samples(last),
        joint,
    );
    Ok(Output {
        files: vec![
            ("clt.csv".into(), table::emit(&header("clt", config), &rows)?),
            ("clt.svg".into(), plot),
        ],
        stdout,
    })
}

pub fn compare(config: &ExperimentConfig, threads: Option<usize>) -> Result<Output, CliError> {
    if config.variants.len() < 2 {
        return Err(CliError::usage("compare needs at least 2 variants"));
    }
    let result = run(config, threads)?;
    let cmp = compare_variants(&result)?;
    let verdict = cmp.verdict().map_or("n/a", |v| v.label());
    let mut stdout = String::new();
    if let Some(t) = cmp.theory {
        let _ = writeln!(stdout, "{}", t.verdict);
    }
    let rows: Vec<CompareRow> = cmp
        .rows
        .iter()
        .map(|r| {
            let _ = writeln!(
                stdout,
                "n={:<10} {}/{} ratio {:.4} [{:.4}, {:.4}]",
                r.n, r.numerator, r.denominator, r.ratio.ratio, r.ci.0, r.ci.1
            );
            CompareRow {
                n: r.n,
                numerator: r.numerator.name().into(),
                denominator: r.denominator.name().into(),
                ratio: r.ratio.ratio,
                stderr: r.ratio.stderr,
                ci_lo: r.ci.0,
                ci_hi: r.ci.1,
                predicted_smaller: match r.predicted_numerator_smaller {
                    Some(true) => "numerator",
                    Some(false) => "denominator",
                    None => "none",
                }
                .into(),
                agrees: match r.agrees {
                    Some(true) => "yes",
                    Some(false) => "no",
                    None => "n/a",
                }
                .into(),
                verdict: verdict.into(),
            }
        })
        .collect();
    Ok(Output {
        files: vec![("compare.csv".into(), table::emit(&header("compare", config), &rows)?)],
        stdout,
    })
}
