use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::normal;
use crate::dataset::{AmputedDataset, CompleteDataset};
use crate::error::{Error, Result};
use crate::rng;

/// Ridge added to `XᵀX` when it is numerically singular.
pub const RIDGE_LAMBDA: f64 = 1e-8;

const CONDITION_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmmOptions {
    /// Donor pool size `K`.
    pub donors: usize,
    /// Number of completed datasets `m`.
    pub imputations: usize,
    /// Gibbs sweeps per dataset.
    pub iterations: usize,
    /// Optional predictor sets per column; all other columns by default.
    #[serde(default)]
    pub predictors: Option<Vec<Vec<usize>>>,
}

impl Default for PmmOptions {
    fn default() -> Self {
        Self {
            donors: 5,
            imputations: 5,
            iterations: 5,
            predictors: None,
        }
    }
}

impl PmmOptions {
    fn validate(&self, d: usize) -> Result<Vec<Vec<usize>>> {
        if self.donors == 0 {
            return Err(Error::invalid("donors", "must be at least 1"));
        }
        if self.imputations == 0 {
            return Err(Error::invalid("imputations", "must be at least 1"));
        }
        match &self.predictors {
            None => Ok((0..d).map(|j| (0..d).filter(|&k| k != j).collect()).collect()),
            Some(sets) => {
                if sets.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "{} predictor sets for {d} columns",
                        sets.len()
                    )));
                }
                for (j, set) in sets.iter().enumerate() {
                    if let Some(k) = set.iter().find(|&&k| k >= d || k == j) {
                        return Err(Error::invalid(
                            format!("predictors[{j}]"),
                            format!("column {k} is out of range or the target itself"),
                        ));
                    }
                }
                Ok(sets.clone())
            }
        }
    }
}

/// Fully conditional specification with predictive mean matching.
///
/// Each of the `m` imputations starts from random draws of observed values
/// and runs `iterations` sweeps. In a sweep, every incomplete column is
/// regressed on its predictors over the rows where it is observed, the
/// coefficients are perturbed by a draw from `N(β̂, σ̂²(XᵀX)⁻¹)`, and each
/// missing cell takes the observed value of one of the `K` rows with the
/// closest prediction, chosen uniformly.
pub fn pmm_impute(x: &AmputedDataset, opts: &PmmOptions, seed: u64) -> Result<Vec<CompleteDataset>> {
    let (n, d) = (x.nrows(), x.ncols());
    if d < 2 {
        return Err(Error::invalid("data", "at least 2 columns required"));
    }
    let predictors = opts.validate(d)?;
    let observed: Vec<Vec<(usize, f64)>> = (0..d).map(|j| x.observed_in_column(j)).collect();
    for (j, obs) in observed.iter().enumerate() {
        if obs.len() < opts.donors + 1 {
            return Err(Error::TooFewObserved {
                column: j,
                observed: obs.len(),
                required: opts.donors + 1,
            });
        }
    }
    let incomplete: Vec<usize> = (0..d).filter(|&j| observed[j].len() < n).collect();

    (0..opts.imputations)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, &[rng::TAG_IMPUTE, t as u64]);
            let mut data = DMatrix::from_fn(n, d, |i, j| x.get(i, j).unwrap_or(f64::NAN));
            for &j in &incomplete {
                for i in 0..n {
                    if x.is_na(i, j) {
                        data[(i, j)] = observed[j][pick(&mut rng, observed[j].len())].1;
                    }
                }
            }
            if !incomplete.is_empty() {
                for _ in 0..opts.iterations {
                    for &j in &incomplete {
                        update_column(&mut data, x, j, &predictors[j], &observed[j], opts.donors, &mut rng);
                    }
                }
            }
            CompleteDataset::new(x.names().to_vec(), data)
        })
        .collect()
}

/// Uniform index in `0..len` as `⌈len·U⌉ − 1`.
fn pick<R: RngCore>(rng: &mut R, len: usize) -> usize {
    let u = rng::open_uniform(rng);
    ((len as f64 * u).ceil() as usize).clamp(1, len) - 1
}

fn update_column<R: RngCore>(
    data: &mut DMatrix<f64>,
    x: &AmputedDataset,
    j: usize,
    preds: &[usize],
    observed: &[(usize, f64)],
    donors: usize,
    rng: &mut R,
) {
    let n = data.nrows();
    let q = preds.len() + 1;
    let design_row = |i: usize, k: usize| if k == 0 { 1.0 } else { data[(i, preds[k - 1])] };
    let x_obs = DMatrix::from_fn(observed.len(), q, |r, k| design_row(observed[r].0, k));
    let y_obs = DVector::from_iterator(observed.len(), observed.iter().map(|o| o.1));

    let xtx = x_obs.transpose() * &x_obs;
    let xty = x_obs.transpose() * &y_obs;
    let chol = factorise(xtx);
    let beta_hat = chol.solve(&xty);
    let rss = (&y_obs - &x_obs * &beta_hat).norm_squared();
    let df = observed.len().saturating_sub(q).max(1);
    let sigma = (rss / df as f64).sqrt();

    let z = DVector::from_fn(q, |_, _| normal::quantile(rng::open_uniform(rng)));
    let delta = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .unwrap_or_else(|| DVector::zeros(q));
    let beta = beta_hat + delta * sigma;

    let predict = |i: usize| (0..q).map(|k| design_row(i, k) * beta[k]).sum::<f64>();
    let pred: Vec<f64> = (0..n).map(predict).collect();

    let k = donors.min(observed.len());
    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(observed.len());
    for i in 0..n {
        if !x.is_na(i, j) {
            continue;
        }
        ranked.clear();
        ranked.extend(observed.iter().map(|&(o, _)| ((pred[o] - pred[i]).abs(), o)));
        ranked.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pool = &mut ranked[..k];
        pool.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let donor = pool[pick(rng, k)].1;
        data[(i, j)] = x.get(donor, j).expect("donor is observed");
    }
}

/// Cholesky factor of `XᵀX`, adding a small ridge when the matrix is
/// singular or badly conditioned.
fn factorise(xtx: DMatrix<f64>) -> Cholesky<f64, Dyn> {
    let q = xtx.nrows();
    if let Some(c) = Cholesky::new(xtx.clone()) {
        let diag = c.l_dirty().diagonal();
        let (lo, hi) = (diag.min(), diag.max());
        if lo > CONDITION_FLOOR * hi {
            return c;
        }
    }
    let ridged = xtx + DMatrix::identity(q, q) * RIDGE_LAMBDA;
    Cholesky::new(ridged.clone()).unwrap_or_else(|| {
        // still not positive definite: fall back to a diagonal-dominant ridge
        let scale = ridged.diagonal().amax().max(1.0);
        Cholesky::new(ridged + DMatrix::identity(q, q) * (scale * RIDGE_LAMBDA))
            .expect("ridged Gram matrix is positive definite")
    })
}
