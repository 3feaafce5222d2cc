//! Flat `key = value` parameter files.
//!
//! ```text
//! # comments run to end of line
//! n = 8
//! T = 30
//! g = 1/3        # fractions are accepted
//! Y = 24000
//! a = 0.8
//! alpha = 0.2
//! beta = 0.5
//! gamma = 0.3
//! K = 100
//! Lambda = 96    # optional
//! mu = 1         # optional, default 1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::city::CityParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

const KEYS: [&str; 11] = ["n", "T", "g", "Y", "a", "alpha", "beta", "gamma", "K", "Lambda", "mu"];

/// Parses a number or a fraction `p/q`.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let (p, q): (f64, f64) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        (q != 0.0).then_some(p / q)
    } else {
        text.parse().ok()
    }
}

pub fn parse_config(text: &str) -> Result<CityParams<f64>, ConfigError> {
    let mut raw: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            })?;
        if raw.insert(known, (line_no, value.trim().to_string())).is_some() {
            return Err(ConfigError::Duplicate {
                line: line_no,
                key: key.to_string(),
            });
        }
    }
    let number = |key: &'static str| -> Result<Option<f64>, ConfigError> {
        raw.get(key)
            .map(|(_, v)| {
                parse_number(v).ok_or_else(|| ConfigError::BadValue {
                    key: key.to_string(),
                    value: v.clone(),
                })
            })
            .transpose()
    };
    let required = |key: &'static str| number(key)?.ok_or(ConfigError::Missing(key));
    let integer = |key: &'static str, v: f64| {
        if v.fract() == 0.0 && v >= 0.0 {
            Ok(v as u64)
        } else {
            Err(ConfigError::BadValue {
                key: key.to_string(),
                value: raw[key].1.clone(),
            })
        }
    };
    Ok(CityParams {
        n: integer("n", required("n")?)? as usize,
        t: required("T")?,
        g: required("g")?,
        y: required("Y")?,
        a: required("a")?,
        alpha: required("alpha")?,
        beta: required("beta")?,
        gamma: required("gamma")?,
        k: required("K")?,
        lambda: number("Lambda")?.map(|v| integer("Lambda", v)).transpose()?,
        mu: number("mu")?.unwrap_or(1.0),
    })
}

pub fn read_config(path: impl AsRef<Path>) -> Result<CityParams<f64>, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Renders parameters in the same format.
pub fn write_config(p: &CityParams<f64>) -> String {
    let mut out = format!(
        "n = {}\nT = {}\ng = {}\nY = {}\na = {}\nalpha = {}\nbeta = {}\ngamma = {}\nK = {}\n",
        p.n, p.t, p.g, p.y, p.a, p.alpha, p.beta, p.gamma, p.k
    );
    if let Some(l) = p.lambda {
        out.push_str(&format!("Lambda = {l}\n"));
    }
    out.push_str(&format!("mu = {}\n", p.mu));
    out
}

/// Operator weight from an hourly vehicle cost `c0` and the value of a
/// passenger hour `pv`: `c0 / (c0 + pv)`.
pub fn fielbaum_mu(c0: f64, pv: f64) -> Result<f64, ConfigError> {
    if !(c0 > 0.0) {
        return Err(ConfigError::NonPositive("c0"));
    }
    if !(pv > 0.0) {
        return Err(ConfigError::NonPositive("pv"));
    }
    Ok(c0 / (c0 + pv))
}
