//! Scenario-based amputation: rows are split into scenarios, each with a
//! missingness pattern, and a row receives its pattern with a logistic
//! probability driven by weighted row values.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{CompleteDataset, MissingnessMask};
use crate::engine::{apply_mask, Amputation};
use crate::error::{Error, Result};
use crate::model::inv_logit;
use crate::rng;

const FREQUENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Allocation {
    /// Explicit disjoint row sets covering all rows. With row permutation
    /// enabled they refer to positions in the permuted order.
    Partition { groups: Vec<Vec<usize>> },
    /// Relative scenario frequencies summing to one.
    Frequencies { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// `K` patterns of width `d`, entries 0 or 1 (1 = missing).
    pub patterns: Vec<Vec<u8>>,
    pub allocation: Allocation,
    /// `K` vectors `(w_0, w_1, …, w_d)`.
    pub weights: Vec<Vec<f64>>,
    #[serde(default = "yes")]
    pub permute_rows: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioAmputation {
    pub amputation: Amputation,
    /// Scenario index of every row, in the original row order.
    pub assignment: Vec<usize>,
}

impl ScenarioSpec {
    /// One all-ones pattern applied to every row with constant probability.
    pub fn whole_row(d: usize, p: f64) -> Self {
        let mut w = vec![0.0; d + 1];
        w[0] = crate::model::logit(p);
        ScenarioSpec {
            patterns: vec![vec![1; d]],
            allocation: Allocation::Frequencies { values: vec![1.0] },
            weights: vec![w],
            permute_rows: true,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let k = self.patterns.len();
        if k == 0 {
            return Err(Error::invalid("patterns", "no scenarios"));
        }
        for (s, pat) in self.patterns.iter().enumerate() {
            if pat.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "pattern {s} has width {}, data has {d} columns",
                    pat.len()
                )));
            }
            if pat.iter().any(|&v| v > 1) {
                return Err(Error::invalid(format!("patterns[{s}]"), "entries must be 0 or 1"));
            }
        }
        if self.weights.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} weight vectors for {k} patterns",
                self.weights.len()
            )));
        }
        for (s, w) in self.weights.iter().enumerate() {
            if w.len() != d + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "weights[{s}] has {} entries, expected {}",
                    w.len(),
                    d + 1
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("weights[{s}]"), "not finite"));
            }
        }
        match &self.allocation {
            Allocation::Frequencies { values } => {
                if values.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "{} frequencies for {k} patterns",
                        values.len()
                    )));
                }
                if values.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
                    return Err(Error::invalid("allocation.values", "frequencies must be nonnegative"));
                }
                let total: f64 = values.iter().sum();
                if (total - 1.0).abs() > FREQUENCY_TOLERANCE {
                    return Err(Error::invalid("allocation.values", format!("sum to {total}, not 1")));
                }
            }
            Allocation::Partition { groups } => {
                if groups.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "{} partition cells for {k} patterns",
                        groups.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Advisory notes about the weights: a weight on a column that the
    /// pattern amputes makes the scenario MNAR-like.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (s, (pat, w)) in self.patterns.iter().zip(&self.weights).enumerate() {
            for (j, &m) in pat.iter().enumerate() {
                if m == 1 && w.get(j + 1).is_some_and(|&b| b != 0.0) {
                    out.push(format!(
                        "scenario {s}: nonzero weight on column {j}, which the pattern amputes (MNAR-type)"
                    ));
                }
            }
            if pat.iter().all(|&m| m == 0) {
                out.push(format!("scenario {s}: all-zero pattern never amputes"));
            }
        }
        out
    }
}

/// Largest-remainder conversion of frequencies to counts summing to `n`.
pub fn largest_remainder(n: usize, freqs: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = freqs.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &s in order.iter().take(n.saturating_sub(assigned)) {
        sizes[s] += 1;
    }
    sizes
}

pub fn scenario_ampute(y: &CompleteDataset, spec: &ScenarioSpec, seed: u64) -> Result<ScenarioAmputation> {
    let (n, d) = (y.nrows(), y.ncols());
    spec.validate(d)?;

    // order[t] is the original row at permuted position t
    let mut order: Vec<usize> = (0..n).collect();
    if spec.permute_rows {
        order.shuffle(&mut rng::stream(seed, &[rng::TAG_PERMUTE]));
    }

    let mut by_position = vec![usize::MAX; n];
    match &spec.allocation {
        Allocation::Frequencies { values } => {
            let sizes = largest_remainder(n, values);
            if let Some(s) = (0..values.len()).find(|&s| values[s] > 0.0 && sizes[s] == 0) {
                return Err(Error::invalid(
                    "allocation.values",
                    format!("scenario {s} has positive frequency but no rows among {n}"),
                ));
            }
            let mut t = 0;
            for (s, &size) in sizes.iter().enumerate() {
                by_position[t..t + size].fill(s);
                t += size;
            }
        }
        Allocation::Partition { groups } => {
            for (s, group) in groups.iter().enumerate() {
                for &t in group {
                    if t >= n {
                        return Err(Error::invalid(
                            format!("allocation.groups[{s}]"),
                            format!("row {t} out of range for {n} rows"),
                        ));
                    }
                    if by_position[t] != usize::MAX {
                        return Err(Error::invalid(
                            format!("allocation.groups[{s}]"),
                            format!("row {t} already assigned to scenario {}", by_position[t]),
                        ));
                    }
                    by_position[t] = s;
                }
            }
            if let Some(t) = by_position.iter().position(|&s| s == usize::MAX) {
                return Err(Error::invalid("allocation.groups", format!("row {t} is in no group")));
            }
        }
    }

    let mut assignment = vec![0; n];
    for (t, &row) in order.iter().enumerate() {
        assignment[row] = by_position[t];
    }

    let mut mask = MissingnessMask::zeros(n, d);
    for (i, &s) in assignment.iter().enumerate() {
        let w = &spec.weights[s];
        let eta = w[0] + (0..d).map(|j| w[j + 1] * y.get(i, j)).sum::<f64>();
        if !eta.is_finite() {
            return Err(Error::NonFinitePredictor { row: i, column: 0 });
        }
        let u = rng::open_uniform(&mut rng::stream(seed, &[rng::TAG_SCENARIO, i as u64]));
        if u <= inv_logit(eta) {
            for (j, &m) in spec.patterns[s].iter().enumerate() {
                mask.set(i, j, m == 1);
            }
        }
    }
    let amputed = apply_mask(y, &mask)?;
    Ok(ScenarioAmputation {
        amputation: Amputation { mask, amputed },
        assignment,
    })
}
