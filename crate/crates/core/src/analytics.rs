//! Closed-form joint missingness probabilities and indicator correlations,
//! with empirical counterparts computed from sampled masks.

use crate::copula::Copula;
use crate::dataset::MissingnessMask;
use crate::error::{Error, Result};

/// Minimum number of masks for the empirical estimators.
pub const MIN_MASKS: usize = 1000;

/// `P(M_{i,j} = 1 for all (i,j) ∈ S) = C̄_S(p_S)`, with `copula_on_s` the
/// copula of the cells in `S`.
pub fn joint_missingness_prob(copula_on_s: &Copula, p_s: &[f64]) -> Result<f64> {
    copula_on_s.survival_cdf(p_s)
}

fn check_margin(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegenerateMargin(p));
    }
    Ok(())
}

/// Pearson correlation of two Bernoulli indicators with success
/// probabilities `p1`, `p2` joined by a bivariate copula.
pub fn pairwise_correlation(bivariate: &Copula, p1: f64, p2: f64) -> Result<f64> {
    check_margin(p1)?;
    check_margin(p2)?;
    if bivariate.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "pairwise correlation needs a bivariate copula, got dimension {}",
            bivariate.dim()
        )));
    }
    let joint = bivariate.survival_cdf(&[p1, p2])?;
    Ok(indicator_correlation(joint, p1, p2))
}

fn indicator_correlation(joint: f64, p1: f64, p2: f64) -> f64 {
    (joint - p1 * p2) / (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt()
}

/// Attainable correlation range `(rho_min, rho_max)` from the lower and
/// upper Fréchet–Hoeffding bounds.
pub fn correlation_bounds(p1: f64, p2: f64) -> Result<(f64, f64)> {
    check_margin(p1)?;
    check_margin(p2)?;
    let w = (p1 + p2 - 1.0).max(0.0);
    let m = p1.min(p2);
    Ok((indicator_correlation(w, p1, p2), indicator_correlation(m, p1, p2)))
}

/// Cells `S` (0-based `(row, column)`) with their marginal probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSelection {
    cells: Vec<(usize, usize)>,
    probabilities: Vec<f64>,
}

impl CellSelection {
    pub fn new(cells: Vec<(usize, usize)>, probabilities: Vec<f64>) -> Result<Self> {
        if cells.len() != probabilities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells, {} probabilities",
                cells.len(),
                probabilities.len()
            )));
        }
        if cells.is_empty() {
            return Err(Error::invalid("cells", "empty selection"));
        }
        for (k, c) in cells.iter().enumerate() {
            if cells[..k].contains(c) {
                return Err(Error::invalid("cells", format!("cell {c:?} repeated")));
            }
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid("probabilities", format!("{p} outside [0, 1]")));
        }
        Ok(Self {
            cells,
            probabilities,
        })
    }

    /// Cells only, for empirical estimation.
    pub fn cells_only(cells: Vec<(usize, usize)>) -> Result<Self> {
        let p = vec![0.5; cells.len()];
        Self::new(cells, p)
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Binomial proportion with its 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub estimate: f64,
    pub half_width_95: f64,
    pub n: usize,
}

impl Proportion {
    pub fn standard_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

fn check_masks(masks: &[MissingnessMask], cells: &[(usize, usize)]) -> Result<()> {
    if masks.len() < MIN_MASKS {
        return Err(Error::invalid(
            "masks",
            format!("{} masks, at least {MIN_MASKS} required", masks.len()),
        ));
    }
    for m in masks {
        if let Some(&(i, j)) = cells.iter().find(|&&(i, j)| i >= m.nrows() || j >= m.ncols()) {
            return Err(Error::invalid(
                "cells",
                format!("cell ({i},{j}) outside {}x{} mask", m.nrows(), m.ncols()),
            ));
        }
    }
    Ok(())
}

/// Fraction of masks in which every selected cell is missing.
pub fn empirical_joint_prob(masks: &[MissingnessMask], selection: &CellSelection) -> Result<Proportion> {
    check_masks(masks, selection.cells())?;
    let hits = masks
        .iter()
        .filter(|m| selection.cells().iter().all(|&(i, j)| m.get(i, j)))
        .count();
    let n = masks.len();
    let est = hits as f64 / n as f64;
    Ok(Proportion {
        estimate: est,
        half_width_95: 1.96 * (est * (1.0 - est) / n as f64).sqrt(),
        n,
    })
}

/// Sample Pearson correlation of two indicator series across masks.
pub fn empirical_correlation(
    masks: &[MissingnessMask],
    cell_a: (usize, usize),
    cell_b: (usize, usize),
) -> Result<f64> {
    check_masks(masks, &[cell_a, cell_b])?;
    let n = masks.len() as f64;
    let (mut sa, mut sb, mut sab) = (0.0, 0.0, 0.0);
    for m in masks {
        let a = m.get(cell_a.0, cell_a.1) as u8 as f64;
        let b = m.get(cell_b.0, cell_b.1) as u8 as f64;
        sa += a;
        sb += b;
        sab += a * b;
    }
    let (ma, mb) = (sa / n, sb / n);
    let va = ma * (1.0 - ma);
    let vb = mb * (1.0 - mb);
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance(format!(
            "indicator of cell {:?} is constant across masks",
            if va == 0.0 { cell_a } else { cell_b }
        )));
    }
    Ok((sab / n - ma * mb) / (va * vb).sqrt())
}
