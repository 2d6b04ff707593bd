//! Flat `key = value` experiment configs.
//!
//! ```text
//! # Exponential tail, slow superquantile gains
//! dist = exponential:1
//! alpha = 0.9
//! a1 = 1
//! a = 0.6
//! b1 = 1
//! b = 0.75
//! n_grid = log:1000:1000000:7
//! replicates = 400
//! seed = 42
//! ```
//!
//! Every key except `dist` and `alpha` has a default. The resolved config
//! renders back to a single header line that parses to the same value.

use std::collections::BTreeMap;

use streamrisk::experiments::{log_grid, ExperimentConfig, Variant};
use streamrisk::{DistributionModel, StepSchedule};

use crate::CliError;

pub const KEYS: [&str; 12] = [
    "dist",
    "alpha",
    "a1",
    "a",
    "b1",
    "b",
    "n_grid",
    "replicates",
    "seed",
    "experiment",
    "warm_start",
    "variants",
];

/// Values supplied on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dist: Option<String>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

/// Splits config text into a key map, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if pairs.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::usage(format!("line {}: key `{key}` repeated", lineno + 1)));
        }
    }
    Ok(pairs)
}

fn number<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::usage(format!("{key}: cannot parse `{raw}`")))
}

/// `10,100,1000` or `log:lo:hi:points`.
pub fn parse_grid(raw: &str) -> Result<Vec<u64>, CliError> {
    if let Some(spec) = raw.strip_prefix("log:") {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(CliError::usage("n_grid: expected log:lo:hi:points"));
        }
        let lo = number("n_grid", parts[0])?;
        let hi = number("n_grid", parts[1])?;
        let points = number("n_grid", parts[2])?;
        return Ok(log_grid(lo, hi, points)?);
    }
    raw.split(',').map(|t| number("n_grid", t.trim())).collect()
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!("{key}: expected true or false, got `{raw}`"))),
    }
}

/// Builds a config from file text (if any) and command-line overrides.
/// Only syntax is checked here; commands validate what they use.
pub fn resolve(text: Option<&str>, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut pairs = match text {
        Some(t) => parse_pairs(t)?,
        None => BTreeMap::new(),
    };
    if let Some(d) = &overrides.dist {
        pairs.insert("dist".into(), d.clone());
    }
    if let Some(a) = overrides.alpha {
        pairs.insert("alpha".into(), a.to_string());
    }
    if let Some(s) = overrides.seed {
        pairs.insert("seed".into(), s.to_string());
    }
    let get = |k: &str| pairs.get(k).map(String::as_str);

    let dist = get("dist").ok_or_else(|| CliError::usage("dist is required (config key or --dist)"))?;
    let model: DistributionModel = dist.parse().map_err(|e| CliError::usage(format!("dist: {e}")))?;
    let alpha: f64 = match get("alpha") {
        Some(raw) => number("alpha", raw)?,
        None => return Err(CliError::usage("alpha is required (config key or --alpha)")),
    };
    let default = StepSchedule::default();
    let num_or = |k: &str, d: f64| get(k).map_or(Ok(d), |raw| number(k, raw));
    let schedule = StepSchedule::new(
        num_or("a1", default.a1)?,
        num_or("a", default.a_exp)?,
        num_or("b1", default.b1)?,
        num_or("b", default.b_exp)?,
    );
    let n_grid = match get("n_grid") {
        Some(raw) => parse_grid(raw)?,
        None => log_grid(1_000, 1_000_000, 7)?,
    };
    let variants = match get("variants") {
        Some(raw) => raw
            .split(',')
            .map(|t| t.parse::<Variant>().map_err(|e| CliError::usage(format!("variants: {e}"))))
            .collect::<Result<Vec<_>, _>>()?,
        None => Variant::ALL.to_vec(),
    };
    Ok(ExperimentConfig {
        model,
        alpha,
        schedule,
        n_grid,
        replicates: get("replicates").map_or(Ok(100), |raw| number("replicates", raw))?,
        master_seed: get("seed").map_or(Ok(0), |raw| number("seed", raw))?,
        experiment: get("experiment").map_or(Ok(0), |raw| number("experiment", raw))?,
        warm_start: get("warm_start").map_or(Ok(false), |raw| parse_bool("warm_start", raw))?,
        variants,
    })
}

/// The resolved config as `key=value` tokens on one line.
pub fn render(config: &ExperimentConfig) -> String {
    let join = |items: Vec<String>| items.join(",");
    let s = &config.schedule;
    format!(
        "dist={} alpha={} a1={} a={} b1={} b={} n_grid={} replicates={} seed={} experiment={} warm_start={} variants={}",
        config.model,
        config.alpha,
        s.a1,
        s.a_exp,
        s.b1,
        s.b_exp,
        join(config.n_grid.iter().map(u64::to_string).collect()),
        config.replicates,
        config.master_seed,
        config.experiment,
        config.warm_start,
        join(config.variants.iter().map(|v| v.name().to_string()).collect()),
    )
}

/// Header comment line for every output file.
pub fn header(command: &str, config: &ExperimentConfig) -> String {
    format!("# command={command} {}", render(config))
}

/// Inverse of [`header`]: the command name and the config.
pub fn parse_header(line: &str) -> Result<(String, ExperimentConfig), CliError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| CliError::usage("header must start with `#`"))?;
    let mut command = None;
    let mut text = String::new();
    for token in body.split_whitespace() {
        match token.strip_prefix("command=") {
            Some(c) => command = Some(c.to_string()),
            None => {
                text.push_str(token);
                text.push('\n');
            }
        }
    }
    let command = command.ok_or_else(|| CliError::usage("header has no command"))?;
    Ok((command, resolve(Some(&text), &Overrides::default())?))
}
