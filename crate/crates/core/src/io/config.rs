//! TOML run configuration.
//!
//! ```toml
//! schema_version = 1
//! mode = "rows-iid"
//! seed = 42
//!
//! [data]
//! builtin = "mtcars01"
//!
//! [copula]
//! family = "homogeneous-gauss"
//! rho = 0.7181
//! dim = 11
//!
//! [probabilities]
//! kind = "constant"
//! value = 0.3333333333333333
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::dataset::{CompleteDataset, MissProbMatrix};
use crate::engine::{CellSetGroupSpec, MonotoneMixtureSpec};
use crate::error::{Error, Result};
use crate::io::{load_csv, range_transform};
use crate::model::{compute_probs, LogisticMissModel};
use crate::mtcars;
use crate::scenario::ScenarioSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RowsIid,
    RowsIndependent,
    CellSets,
    Monotone,
    Scenario,
    Mechanism,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::RowsIid => "rows-iid",
            Mode::RowsIndependent => "rows-independent",
            Mode::CellSets => "cell-sets",
            Mode::Monotone => "monotone",
            Mode::Scenario => "scenario",
            Mode::Mechanism => "mechanism",
        }
    }
}

/// Where the complete data comes from: a CSV file or a bundled dataset
/// (`mtcars` or `mtcars01`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub range_transform: bool,
    /// Column name to sort rows by after range transformation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Probabilities {
    Constant { value: f64 },
    /// One row of `d` probabilities repeated for every row.
    Row { values: Vec<f64> },
    /// Full `n × d` matrix.
    Matrix { values: Vec<Vec<f64>> },
    Model { model: LogisticMissModel },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmputationConfig {
    pub schema_version: u32,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copula: Option<CopulaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_copulas: Option<Vec<CopulaSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Probabilities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_sets: Option<CellSetGroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneMixtureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

/// Unwrap a mode-specific section or report the missing key.
pub fn require<'a, T>(value: &'a Option<T>, key: &str, mode: Mode) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing key `{key}` required by mode {}", mode.name())))
}

impl AmputationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        if cfg.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load the dataset; relative paths are taken from `base_dir`.
    pub fn dataset(&self, base_dir: &Path) -> Result<CompleteDataset> {
        let raw = match (&self.data.path, self.data.builtin.as_deref()) {
            (Some(p), None) => load_csv(&base_dir.join(p))?,
            (None, Some(name)) => mtcars::builtin(name)
                .ok_or_else(|| Error::Config(format!("unknown builtin dataset `{name}`")))?,
            (None, None) => return Err(Error::Config("missing key `data.path` or `data.builtin`".into())),
            (Some(_), Some(_)) => {
                return Err(Error::Config("`data.path` and `data.builtin` are exclusive".into()))
            }
        };
        if !self.data.range_transform {
            if self.data.sort_by.is_some() {
                return Err(Error::Config("`data.sort_by` requires `data.range_transform`".into()));
            }
            return Ok(raw);
        }
        let sort = match &self.data.sort_by {
            None => None,
            Some(name) => Some(raw.column_index(name).ok_or_else(|| {
                Error::Config(format!("`data.sort_by`: no column named `{name}`"))
            })?),
        };
        range_transform(&raw, sort)
    }

    /// Make the data path absolute so the config can be rerun from anywhere.
    pub fn resolved(&self, base_dir: &Path, seed: u64, out_dir: &Path) -> Self {
        let mut cfg = self.clone();
        cfg.seed = Some(seed);
        if let Some(p) = &cfg.data.path {
            let full = base_dir.join(p);
            cfg.data.path = Some(std::fs::canonicalize(&full).unwrap_or(full));
        }
        cfg.output.dir = Some(std::fs::canonicalize(out_dir).unwrap_or_else(|_| out_dir.to_path_buf()));
        cfg
    }
}

impl Probabilities {
    pub fn resolve(&self, y: &CompleteDataset) -> Result<MissProbMatrix> {
        let (n, d) = (y.nrows(), y.ncols());
        match self {
            Probabilities::Constant { value } => MissProbMatrix::constant(n, d, *value),
            Probabilities::Row { values } => {
                if values.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "probabilities.values has {} entries for {d} columns",
                        values.len()
                    )));
                }
                MissProbMatrix::from_row(n, values)
            }
            Probabilities::Matrix { values } => {
                if values.len() != n || values.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch(format!(
                        "probabilities.values must be {n}x{d}"
                    )));
                }
                MissProbMatrix::new(DMatrix::from_fn(n, d, |i, j| values[i][j]))
            }
            Probabilities::Model { model } => compute_probs(model, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
schema_version = 1
mode = "mechanism"
seed = 7

[data]
builtin = "mtcars"
range_transform = true
sort_by = "mpg"

[copula]
family = "homogeneous-gauss"
rho = 0.7181
dim = 11

[probabilities]
kind = "model"

[probabilities.model]
sharing = "global"

[probabilities.model.cell]
kind = "logistic"
intercept = -0.9280
weights = [{ column = 0, beta = 0.4526 }]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = AmputationConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.mode, Mode::Mechanism);
        assert_eq!(cfg.replications, 1);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(AmputationConfig::from_toml_str(&text).unwrap(), cfg);
        let y = cfg.dataset(Path::new(".")).unwrap();
        assert_eq!((y.nrows(), y.ncols()), (32, 11));
        assert_eq!(y.get(0, 0), 0.0);
        let p = cfg.probabilities.unwrap().resolve(&y).unwrap();
        assert!(p.values().iter().all(|&v| (0.28..0.39).contains(&v)));
    }

    #[test]
    fn schema_and_unknown_keys() {
        let bad = EXAMPLE.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(AmputationConfig::from_toml_str(&bad), Err(Error::Config(_))));
        let bad = EXAMPLE.replace("seed = 7", "seed = 7\ncolour = 1");
        assert!(matches!(AmputationConfig::from_toml_str(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn require_names_the_key() {
        let cfg = AmputationConfig::from_toml_str(EXAMPLE).unwrap();
        let err = require(&cfg.cell_sets, "cell_sets", Mode::CellSets).unwrap_err();
        assert!(err.to_string().contains("cell_sets"));
    }
}
