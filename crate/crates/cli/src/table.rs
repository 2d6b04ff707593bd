//! CSV schemas for every output file.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`; missing values are written as `n/a`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The shorter of the plain and exponent forms of `v`; both parse back to `v`.
pub fn fmt_num(v: f64) -> String {
    let plain = v.to_string();
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

mod num {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt_num(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_num {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&super::fmt_num(*x)),
            None => s.serialize_str("n/a"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "n/a" {
            return Ok(None);
        }
        raw.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub source: String,
    #[serde(with = "num")]
    pub theta: f64,
    #[serde(with = "num")]
    pub vartheta: f64,
    #[serde(with = "num")]
    pub density: f64,
    #[serde(with = "num")]
    pub v_alpha: f64,
    #[serde(with = "num")]
    pub ratio: f64,
    #[serde(with = "num")]
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub quantity: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub variant: String,
    pub n: u64,
    #[serde(with = "num")]
    pub mse: f64,
    #[serde(with = "num")]
    pub stderr: f64,
    #[serde(with = "opt_num")]
    pub theory_first_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitRow {
    pub variant: String,
    #[serde(with = "opt_num")]
    pub slope: Option<f64>,
    #[serde(with = "opt_num")]
    pub intercept: Option<f64>,
    #[serde(with = "opt_num")]
    pub r2: Option<f64>,
    #[serde(with = "num")]
    pub theory_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: u64,
    #[serde(with = "num")]
    pub s2_11: f64,
    #[serde(with = "num")]
    pub s2_12: f64,
    #[serde(with = "num")]
    pub s2_22: f64,
    #[serde(with = "num")]
    pub se_11: f64,
    #[serde(with = "num")]
    pub se_12: f64,
    #[serde(with = "num")]
    pub se_22: f64,
    #[serde(with = "opt_num")]
    pub theory_11: Option<f64>,
    #[serde(with = "opt_num")]
    pub theory_12: Option<f64>,
    #[serde(with = "opt_num")]
    pub theory_22: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: u64,
    pub numerator: String,
    pub denominator: String,
    #[serde(with = "num")]
    pub ratio: f64,
    #[serde(with = "num")]
    pub stderr: f64,
    #[serde(with = "num")]
    pub ci_lo: f64,
    #[serde(with = "num")]
    pub ci_hi: f64,
    /// `numerator`, `denominator` or `none`.
    pub predicted_smaller: String,
    /// `yes`, `no` or `n/a`.
    pub agrees: String,
    pub verdict: String,
}

/// Header line followed by the CSV body.
pub fn emit<R: Serialize>(header: &str, rows: &[R]) -> Result<String, CliError> {
    let mut out = Vec::new();
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::runtime(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| CliError::runtime(format!("csv: {e}")))?;
    }
    String::from_utf8(out).map_err(|e| CliError::runtime(format!("csv: {e}")))
}

/// Parses CSV text written by [`emit`], skipping `#` lines.
pub fn parse<R: DeserializeOwned>(text: &str) -> Result<Vec<R>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| CliError::usage(format!("csv: {e}")))
}
