//! Input files: flat `key = value` lines under `[section]` headers, read
//! with the `toml` parser.
//!
//! System catalog, one section per system:
//!
//! ```text
//! [arctan]
//! a = 1.0
//! b = 1.0
//! c = 1.0
//! d = 1.0
//! term = "arctan_linear"
//! ```
//!
//! Symbol file. `a<k>` lists the coefficients of `a_k(λ)` in increasing
//! powers of λ; the optional `[nonlinearity]` section picks `f`:
//!
//! ```text
//! [symbol]
//! degree = 2
//! a0 = [1.0]
//! a1 = [0.0, 1.0]
//!
//! [nonlinearity]
//! kind = "saturating_cubic"
//! eps = 0.05
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hb::{Nonlinearity, SymbolPolynomial};
use crate::lv::{InteractionTerm, LvSystem};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub term: String,
}

impl SystemEntry {
    pub fn build(&self) -> Result<LvSystem, ConfigError> {
        let term = InteractionTerm::from_kind(&self.term)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown term kind `{}`", self.term)))?;
        LvSystem::new(self.a, self.b, self.c, self.d, term).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Systems keyed by section name.
pub type Catalog = BTreeMap<String, SystemEntry>;

pub fn parse_catalog(text: &str) -> Result<Catalog, ConfigError> {
    let cat: Catalog = toml::from_str(text)?;
    if cat.is_empty() {
        return Err(ConfigError::Invalid("catalog has no systems".into()));
    }
    Ok(cat)
}

/// Picks `name`, or the only entry when `name` is `None`.
pub fn select_system<'a>(cat: &'a Catalog, name: Option<&str>) -> Result<(&'a str, &'a SystemEntry), ConfigError> {
    match name {
        Some(n) => cat
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| ConfigError::Invalid(format!("no system named `{n}`"))),
        None if cat.len() == 1 => {
            let (k, v) = cat.iter().next().expect("one entry");
            Ok((k.as_str(), v))
        }
        None => Err(ConfigError::Invalid(format!(
            "catalog holds {} systems; choose one of: {}",
            cat.len(),
            cat.keys().cloned().collect::<Vec<_>>().join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub kind: String,
    #[serde(default)]
    pub eps: f64,
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity, ConfigError> {
        match self.kind.as_str() {
            "zero" => Ok(Nonlinearity::zero()),
            "linear" => Ok(Nonlinearity::linear(self.eps)),
            "saturating_cubic" => Ok(Nonlinearity::saturating_cubic(self.eps)),
            k => Err(ConfigError::Invalid(format!("unknown nonlinearity kind `{k}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolFile {
    /// `coefficients[k][j]` multiplies `λ^j p^k`.
    pub coefficients: Vec<Vec<f64>>,
    pub nonlinearity: Option<NonlinearitySpec>,
}

impl SymbolFile {
    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn symbol(&self) -> Result<SymbolPolynomial, ConfigError> {
        SymbolPolynomial::from_polynomials(self.coefficients.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbolFile {
    symbol: toml::Table,
    nonlinearity: Option<NonlinearitySpec>,
}

pub fn parse_symbol(text: &str) -> Result<SymbolFile, ConfigError> {
    let raw: RawSymbolFile = toml::from_str(text)?;
    let mut table = raw.symbol;
    let degree = table
        .remove("degree")
        .and_then(|v| v.as_integer())
        .ok_or_else(|| ConfigError::Invalid("[symbol] needs an integer `degree`".into()))?;
    if degree < 2 {
        return Err(ConfigError::Invalid(format!("degree must be at least 2, got {degree}")));
    }
    let mut coefficients = Vec::with_capacity(degree as usize);
    for k in 0..degree {
        let key = format!("a{k}");
        let value = table
            .remove(&key)
            .ok_or_else(|| ConfigError::Invalid(format!("[symbol] is missing `{key}`")))?;
        let list = match value {
            toml::Value::Array(items) => items
                .iter()
                .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
                .collect::<Option<Vec<f64>>>(),
            toml::Value::Float(x) => Some(vec![x]),
            toml::Value::Integer(i) => Some(vec![i as f64]),
            _ => None,
        }
        .ok_or_else(|| ConfigError::Invalid(format!("`{key}` must be a number or a list of numbers")))?;
        coefficients.push(list);
    }
    if let Some(extra) = table.keys().next() {
        return Err(ConfigError::Invalid(format!("unexpected key `{extra}` in [symbol]")));
    }
    Ok(SymbolFile {
        coefficients,
        nonlinearity: raw.nonlinearity,
    })
}

pub fn read_to_string(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}
