//! Logistic missingness models, mechanism classification and
//! probability-implied coefficient calibration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{CompleteDataset, MissProbMatrix};
use crate::error::{Error, Result};

/// One covariate term `β_k · y_{i,k}`; `column` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub column: usize,
    pub beta: f64,
}

/// Missingness model of a single cell (or of every cell sharing it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CellModel {
    /// `p = 1 / (1 + exp(−(intercept + Σ β_k y_k)))`.
    Logistic {
        intercept: f64,
        #[serde(default)]
        weights: Vec<Weight>,
    },
    /// A fixed probability, including the deterministic values 0 and 1.
    Fixed { p: f64 },
}

impl CellModel {
    pub fn logistic(intercept: f64, weights: &[(usize, f64)]) -> Self {
        CellModel::Logistic {
            intercept,
            weights: weights
                .iter()
                .map(|&(column, beta)| Weight { column, beta })
                .collect(),
        }
    }

    pub fn fixed(p: f64) -> Self {
        CellModel::Fixed { p }
    }

    fn nonzero_weights(&self) -> impl Iterator<Item = &Weight> {
        let weights: &[Weight] = match self {
            CellModel::Logistic { weights, .. } => weights,
            CellModel::Fixed { .. } => &[],
        };
        weights.iter().filter(|w| w.beta != 0.0)
    }

    fn validate(&self, d: usize, field: &str) -> Result<()> {
        match self {
            CellModel::Logistic { intercept, weights } => {
                if !intercept.is_finite() {
                    return Err(Error::invalid(format!("{field}.intercept"), "not finite"));
                }
                for w in weights {
                    if w.column >= d {
                        return Err(Error::invalid(
                            format!("{field}.weights"),
                            format!("column {} out of range for {d} columns", w.column),
                        ));
                    }
                    if !w.beta.is_finite() {
                        return Err(Error::invalid(format!("{field}.weights"), "beta not finite"));
                    }
                }
            }
            CellModel::Fixed { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(format!("{field}.p"), format!("{p} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    fn probability(&self, y: &CompleteDataset, row: usize, col: usize) -> Result<f64> {
        match self {
            CellModel::Fixed { p } => Ok(*p),
            CellModel::Logistic { intercept, weights } => {
                let eta = intercept
                    + weights
                        .iter()
                        .map(|w| w.beta * y.get(row, w.column))
                        .sum::<f64>();
                if !eta.is_finite() {
                    return Err(Error::NonFinitePredictor { row, column: col });
                }
                Ok(inv_logit(eta))
            }
        }
    }
}

/// Cell models for an explicit group of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowGroup {
    pub rows: Vec<usize>,
    pub columns: Vec<CellModel>,
}

/// How coefficients are shared across cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sharing", rename_all = "kebab-case")]
pub enum LogisticMissModel {
    /// One model for every cell.
    Global { cell: CellModel },
    /// One model per column, shared by all rows.
    PerColumn { columns: Vec<CellModel> },
    /// One model per cell, `n × d`.
    PerCell { cells: Vec<Vec<CellModel>> },
    /// Per-column models for explicit row groups that partition the rows.
    Grouped { groups: Vec<RowGroup> },
}

/// MCAR, MAR or MNAR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MechanismKind {
    Mcar,
    Mar,
    Mnar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MnarFlavor {
    None,
    Suicide,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MechanismLabel {
    pub kind: MechanismKind,
    /// Largest number of covariates with a nonzero weight in any row.
    pub degree: usize,
    pub flavor: MnarFlavor,
}

impl LogisticMissModel {
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        match self {
            LogisticMissModel::Global { cell } => cell.validate(d, "model.cell"),
            LogisticMissModel::PerColumn { columns } => {
                check_len(columns.len(), d, "model.columns")?;
                for (j, c) in columns.iter().enumerate() {
                    c.validate(d, &format!("model.columns[{j}]"))?;
                }
                Ok(())
            }
            LogisticMissModel::PerCell { cells } => {
                check_len(cells.len(), n, "model.cells")?;
                for (i, row) in cells.iter().enumerate() {
                    check_len(row.len(), d, &format!("model.cells[{i}]"))?;
                    for (j, c) in row.iter().enumerate() {
                        c.validate(d, &format!("model.cells[{i}][{j}]"))?;
                    }
                }
                Ok(())
            }
            LogisticMissModel::Grouped { groups } => {
                let mut owner = vec![None; n];
                for (g, group) in groups.iter().enumerate() {
                    check_len(group.columns.len(), d, &format!("model.groups[{g}].columns"))?;
                    for (j, c) in group.columns.iter().enumerate() {
                        c.validate(d, &format!("model.groups[{g}].columns[{j}]"))?;
                    }
                    for &i in &group.rows {
                        if i >= n {
                            return Err(Error::invalid(
                                format!("model.groups[{g}].rows"),
                                format!("row {i} out of range for {n} rows"),
                            ));
                        }
                        if let Some(other) = owner[i].replace(g) {
                            return Err(Error::invalid(
                                format!("model.groups[{g}].rows"),
                                format!("row {i} already in group {other}"),
                            ));
                        }
                    }
                }
                if let Some(i) = owner.iter().position(Option::is_none) {
                    return Err(Error::invalid("model.groups", format!("row {i} is in no group")));
                }
                Ok(())
            }
        }
    }

    fn cell(&self, row: usize, col: usize) -> &CellModel {
        match self {
            LogisticMissModel::Global { cell } => cell,
            LogisticMissModel::PerColumn { columns } => &columns[col],
            LogisticMissModel::PerCell { cells } => &cells[row][col],
            LogisticMissModel::Grouped { groups } => groups
                .iter()
                .find(|g| g.rows.contains(&row))
                .map(|g| &g.columns[col])
                .expect("validated partition"),
        }
    }

    /// Models that apply to column `col` across all rows.
    fn column_models(&self, col: usize) -> Vec<&CellModel> {
        match self {
            LogisticMissModel::Global { cell } => vec![cell],
            LogisticMissModel::PerColumn { columns } => vec![&columns[col]],
            LogisticMissModel::PerCell { cells } => cells.iter().map(|r| &r[col]).collect(),
            LogisticMissModel::Grouped { groups } => groups.iter().map(|g| &g.columns[col]).collect(),
        }
    }

    /// MCAR model with constant probability `p ∈ (0, 1)`.
    pub fn mcar(p: f64) -> Result<Self> {
        check_open(p, "p")?;
        Ok(LogisticMissModel::Global {
            cell: CellModel::logistic(logit(p), &[]),
        })
    }

    /// Column `driver` is never missing; every other column depends on it
    /// through coefficients implied by `[p − ε, p + ε]` over covariates in
    /// `[c_min, c_max]`.
    pub fn mar(d: usize, driver: usize, p: f64, eps: f64, c_min: f64, c_max: f64) -> Result<Self> {
        let (b0, b) = implied_coefficients(p, eps, c_min, c_max, 1)?;
        Ok(LogisticMissModel::PerColumn {
            columns: (0..d)
                .map(|j| {
                    if j == driver {
                        CellModel::fixed(0.0)
                    } else {
                        CellModel::logistic(b0, &[(driver, b)])
                    }
                })
                .collect(),
        })
    }

    /// Each column depends on its own value only.
    pub fn suicide_mnar(d: usize, p: f64, eps: f64, c_min: f64, c_max: f64) -> Result<Self> {
        let (b0, b) = implied_coefficients(p, eps, c_min, c_max, 1)?;
        Ok(LogisticMissModel::PerColumn {
            columns: (0..d).map(|j| CellModel::logistic(b0, &[(j, b)])).collect(),
        })
    }

    /// Each column depends on all `d` columns with equal weights.
    pub fn group_mnar(d: usize, p: f64, eps: f64, c_min: f64, c_max: f64) -> Result<Self> {
        let (b0, b) = implied_coefficients(p, eps, c_min, c_max, d)?;
        let weights: Vec<(usize, f64)> = (0..d).map(|k| (k, b)).collect();
        Ok(LogisticMissModel::Global {
            cell: CellModel::logistic(b0, &weights),
        })
    }
}

fn check_len(actual: usize, expected: usize, field: &str) -> Result<()> {
    if actual != expected {
        return Err(Error::DimensionMismatch(format!(
            "{field} has {actual} entries, expected {expected}"
        )));
    }
    Ok(())
}

fn check_open(p: f64, field: &str) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(field, format!("{p} outside (0, 1)")));
    }
    Ok(())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn inv_logit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Evaluate the model on every cell of `y`.
pub fn compute_probs(model: &LogisticMissModel, y: &CompleteDataset) -> Result<MissProbMatrix> {
    let (n, d) = (y.nrows(), y.ncols());
    model.validate(n, d)?;
    let mut values = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            values[(i, j)] = model.cell(i, j).probability(y, i, j)?;
        }
    }
    MissProbMatrix::new(values)
}

/// Intercept and common slope that map `k` covariates in `[c_min, c_max]`
/// onto probabilities in `[p − ε, p + ε]`. Returns `(beta0, beta_each)`.
pub fn implied_coefficients(
    p: f64,
    eps: f64,
    c_min: f64,
    c_max: f64,
    n_covariates: usize,
) -> Result<(f64, f64)> {
    if !(c_min.is_finite() && c_max.is_finite()) || c_min >= c_max {
        return Err(Error::invalid("c_min", format!("need c_min < c_max, got [{c_min}, {c_max}]")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("eps", format!("{eps} must be positive")));
    }
    if !(p - eps > 0.0 && p + eps < 1.0) {
        return Err(Error::invalid(
            "eps",
            format!("[{}, {}] not inside (0, 1)", p - eps, p + eps),
        ));
    }
    if n_covariates == 0 {
        return Err(Error::invalid("n_covariates", "must be at least 1"));
    }
    let k = n_covariates as f64;
    let lo = logit(p - eps);
    let beta = (logit(p + eps) - lo) / (k * (c_max - c_min));
    Ok((lo - c_min * k * beta, beta))
}

/// Classify the mechanism governing column `col` (0-based).
pub fn classify_mechanism(model: &LogisticMissModel, col: usize) -> MechanismLabel {
    let models = model.column_models(col);
    let degree = models
        .iter()
        .map(|m| m.nonzero_weights().count())
        .max()
        .unwrap_or(0);
    if degree == 0 {
        return MechanismLabel {
            kind: MechanismKind::Mcar,
            degree: 0,
            flavor: MnarFlavor::None,
        };
    }
    let own: Vec<&&CellModel> = models
        .iter()
        .filter(|m| m.nonzero_weights().any(|w| w.column == col))
        .collect();
    if own.is_empty() {
        return MechanismLabel {
            kind: MechanismKind::Mar,
            degree,
            flavor: MnarFlavor::None,
        };
    }
    let mnar_degree = own.iter().map(|m| m.nonzero_weights().count()).max().unwrap_or(1);
    MechanismLabel {
        kind: MechanismKind::Mnar,
        degree,
        flavor: if mnar_degree == 1 {
            MnarFlavor::Suicide
        } else {
            MnarFlavor::Group
        },
    }
}
