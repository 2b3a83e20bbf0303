//! Matrix types shared by every module: the complete data `Y`, the marginal
//! missingness probabilities `P`, the indicator matrix `M` and the amputed
//! data `X`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Complete real-valued `n × d` data with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteDataset {
    names: Vec<String>,
    values: DMatrix<f64>,
}

impl CompleteDataset {
    pub fn new(names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (row, col) = (idx % values.nrows(), idx / values.nrows());
            return Err(Error::invalid(
                "dataset",
                format!("non-finite value at row {row}, column {col}"),
            ));
        }
        Ok(Self { names, values })
    }

    /// Build from row-major rows, naming columns `V1..Vd`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("dataset", "ragged rows"));
        }
        let values = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new((1..=d).map(|j| format!("V{j}")).collect(), values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_mean(&self, col: usize) -> f64 {
        self.values.column(col).mean()
    }
}

/// Marginal missingness probabilities `p_{i,j}` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MissProbMatrix(DMatrix<f64>);

impl MissProbMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for ((i, j), p) in indexed(&values) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(
                    "probabilities",
                    format!("p[{i},{j}] = {p} outside [0, 1]"),
                ));
            }
        }
        Ok(Self(values))
    }

    pub fn constant(nrows: usize, ncols: usize, p: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(nrows, ncols, p))
    }

    /// Every row equal to `row`.
    pub fn from_row(nrows: usize, row: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(nrows, row.len(), |_, j| row[j]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }
}

/// Missingness indicator matrix; `true` marks a cell treated as missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingnessMask(DMatrix<bool>);

impl MissingnessMask {
    pub fn new(values: DMatrix<bool>) -> Self {
        Self(values)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self(DMatrix::from_element(nrows, ncols, false))
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl FnMut(usize, usize) -> bool) -> Self {
        Self(DMatrix::from_fn(nrows, ncols, f))
    }

    pub fn values(&self) -> &DMatrix<bool> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, missing: bool) {
        self.0[(row, col)] = missing;
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.ncols()).map(|j| self.get(row, j)).collect()
    }

    pub fn count_missing(&self) -> usize {
        self.0.iter().filter(|&&m| m).count()
    }

    pub fn missing_fraction(&self) -> f64 {
        self.count_missing() as f64 / self.0.len().max(1) as f64
    }

    pub fn row_missing_count(&self, row: usize) -> usize {
        (0..self.ncols()).filter(|&j| self.get(row, j)).count()
    }

    /// Split into one `1 × d` mask per row.
    pub fn split_rows(&self) -> Vec<MissingnessMask> {
        (0..self.nrows())
            .map(|i| Self::from_fn(1, self.ncols(), |_, j| self.get(i, j)))
            .collect()
    }
}

/// Amputed data: `None` is the NA value.
#[derive(Debug, Clone, PartialEq)]
pub struct AmputedDataset {
    names: Vec<String>,
    values: DMatrix<Option<f64>>,
}

impl AmputedDataset {
    pub fn new(names: Vec<String>, values: DMatrix<Option<f64>>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        Ok(Self { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<Option<f64>> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[(row, col)]
    }

    pub fn is_na(&self, row: usize, col: usize) -> bool {
        self.values[(row, col)].is_none()
    }

    /// Recover the indicator matrix from the NA pattern.
    pub fn mask(&self) -> MissingnessMask {
        MissingnessMask::from_fn(self.nrows(), self.ncols(), |i, j| self.is_na(i, j))
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    pub fn observed_in_column(&self, col: usize) -> Vec<(usize, f64)> {
        (0..self.nrows())
            .filter_map(|i| self.get(i, col).map(|v| (i, v)))
            .collect()
    }

    /// Replace every NA by the corresponding entry of `fill`.
    pub fn completed_with(&self, fill: &DMatrix<f64>) -> Result<CompleteDataset> {
        if fill.shape() != self.values.shape() {
            return Err(Error::DimensionMismatch("fill shape".into()));
        }
        let values = DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| {
            self.get(i, j).unwrap_or(fill[(i, j)])
        });
        CompleteDataset::new(self.names.clone(), values)
    }
}

impl From<&CompleteDataset> for AmputedDataset {
    fn from(y: &CompleteDataset) -> Self {
        Self {
            names: y.names().to_vec(),
            values: y.values().map(Some),
        }
    }
}

fn indexed(m: &DMatrix<f64>) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
    let n = m.nrows();
    m.iter().enumerate().map(move |(k, &v)| ((k % n, k / n), v))
}
