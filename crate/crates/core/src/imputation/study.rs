use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complete_case_mean, pmm_impute, PmmOptions};
use crate::copula::{Copula, CopulaSpec};
use crate::dataset::{AmputedDataset, CompleteDataset};
use crate::engine::ampute_mechanism;
use crate::error::{Error, Result};
use crate::model::LogisticMissModel;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    CompleteCase,
    PmmMice,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::CompleteCase => "complete-case",
            Estimator::PmmMice => "pmm-mice",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    pub label: String,
    pub model: LogisticMissModel,
    pub copula: CopulaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasStudyConfig {
    /// Column whose mean is estimated.
    pub target: usize,
    pub replications: usize,
    pub mechanisms: Vec<Mechanism>,
    pub estimator: Estimator,
    #[serde(default)]
    pub pmm: PmmOptions,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSample {
    pub mechanism: String,
    pub replication: usize,
    pub estimate: f64,
    pub bias: f64,
    /// Sample variance of the per-imputation means (PMM only).
    pub imputation_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasFailure {
    pub mechanism: String,
    pub replication: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSummary {
    pub mechanism: String,
    pub succeeded: usize,
    pub failed: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Count of imputed cells whose value is not among the observed values of
/// the column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DonorAudit {
    pub imputed_cells: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasStudyReport {
    pub full_data_mean: f64,
    pub samples: Vec<BiasSample>,
    pub failures: Vec<BiasFailure>,
    pub summaries: Vec<BiasSummary>,
    pub donors: DonorAudit,
}

impl BiasStudyReport {
    pub fn summary(&self, mechanism: &str) -> Option<&BiasSummary> {
        self.summaries.iter().find(|s| s.mechanism == mechanism)
    }
}

/// MCAR at `p = 1/3`, MAR driven by column 0 and suicide MNAR, each with a
/// narrow (`1/3 ± 0.05`) and a wide (`[0.001, 0.999]`) calibration, all
/// joined by a homogeneous Gauss copula with parameter `rho`. Covariates
/// are assumed to lie in `[0, 1]`.
pub fn standard_mechanisms(d: usize, rho: f64) -> Result<Vec<Mechanism>> {
    let copula = CopulaSpec::homogeneous_gauss(rho, d);
    let third = 1.0 / 3.0;
    let mk = |label: &str, model: LogisticMissModel| Mechanism {
        label: label.to_string(),
        model,
        copula: copula.clone(),
    };
    Ok(vec![
        mk("MCAR", LogisticMissModel::mcar(third)?),
        mk("MAR-narrow", LogisticMissModel::mar(d, 0, third, 0.05, 0.0, 1.0)?),
        mk("MAR-wide", LogisticMissModel::mar(d, 0, 0.5, 0.499, 0.0, 1.0)?),
        mk("MNAR-narrow", LogisticMissModel::suicide_mnar(d, third, 0.05, 0.0, 1.0)?),
        mk("MNAR-wide", LogisticMissModel::suicide_mnar(d, 0.5, 0.499, 0.0, 1.0)?),
    ])
}

enum Outcome {
    Ok(BiasSample, DonorAudit),
    Failed(BiasFailure),
}

/// Repeatedly ampute `y` under every mechanism and record the bias of the
/// chosen mean estimator. Replications whose estimator fails (for example
/// no complete cases) are reported in `failures`.
pub fn run_bias_study(y: &CompleteDataset, cfg: &BiasStudyConfig) -> Result<BiasStudyReport> {
    if cfg.replications == 0 {
        return Err(Error::invalid("replications", "must be at least 1"));
    }
    if cfg.target >= y.ncols() {
        return Err(Error::invalid(
            "target",
            format!("{} out of range for {} columns", cfg.target, y.ncols()),
        ));
    }
    if cfg.pmm.donors == 0 || cfg.pmm.imputations == 0 {
        return Err(Error::invalid("pmm", "donors and imputations must be at least 1"));
    }
    let copulas = cfg
        .mechanisms
        .iter()
        .map(|m| {
            m.model.validate(y.nrows(), y.ncols())?;
            Copula::new(m.copula.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = y.column_mean(cfg.target);

    let tasks: Vec<(usize, usize)> = (0..cfg.mechanisms.len())
        .flat_map(|k| (0..cfg.replications).map(move |r| (k, r)))
        .collect();
    let outcomes = tasks
        .par_iter()
        .map(|&(k, r)| {
            let mech = &cfg.mechanisms[k];
            let seed = rng::derive(cfg.seed, &[rng::TAG_STUDY, k as u64, r as u64]);
            let (amp, _) = ampute_mechanism(y, &mech.model, &copulas[k], seed)?;
            let estimate = estimate(&amp.amputed, cfg, rng::derive(seed, &[rng::TAG_IMPUTE]));
            Ok(match estimate {
                Ok((value, spread, audit)) => Outcome::Ok(
                    BiasSample {
                        mechanism: mech.label.clone(),
                        replication: r,
                        estimate: value,
                        bias: value - truth,
                        imputation_variance: spread,
                    },
                    audit,
                ),
                Err(e) => Outcome::Failed(BiasFailure {
                    mechanism: mech.label.clone(),
                    replication: r,
                    reason: e.to_string(),
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    let mut donors = DonorAudit::default();
    for o in outcomes {
        match o {
            Outcome::Ok(s, a) => {
                donors.imputed_cells += a.imputed_cells;
                donors.violations += a.violations;
                samples.push(s);
            }
            Outcome::Failed(f) => failures.push(f),
        }
    }
    let summaries = cfg
        .mechanisms
        .iter()
        .map(|m| {
            let mut biases: Vec<f64> = samples
                .iter()
                .filter(|s| s.mechanism == m.label)
                .map(|s| s.bias)
                .collect();
            biases.sort_by(f64::total_cmp);
            let failed = failures.iter().filter(|f| f.mechanism == m.label).count();
            let mean = if biases.is_empty() {
                f64::NAN
            } else {
                biases.iter().sum::<f64>() / biases.len() as f64
            };
            BiasSummary {
                mechanism: m.label.clone(),
                succeeded: biases.len(),
                failed,
                mean,
                q1: quantile(&biases, 0.25),
                median: quantile(&biases, 0.5),
                q3: quantile(&biases, 0.75),
            }
        })
        .collect();
    Ok(BiasStudyReport {
        full_data_mean: truth,
        samples,
        failures,
        summaries,
        donors,
    })
}

fn estimate(x: &AmputedDataset, cfg: &BiasStudyConfig, seed: u64) -> Result<(f64, Option<f64>, DonorAudit)> {
    match cfg.estimator {
        Estimator::CompleteCase => Ok((complete_case_mean(x, cfg.target)?, None, DonorAudit::default())),
        Estimator::PmmMice => {
            let completed = pmm_impute(x, &cfg.pmm, seed)?;
            let means: Vec<f64> = completed.iter().map(|c| c.column_mean(cfg.target)).collect();
            let m = means.len() as f64;
            let mean = means.iter().sum::<f64>() / m;
            let var = if means.len() > 1 {
                means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            Ok((mean, Some(var), audit_donors(x, &completed)))
        }
    }
}

/// Check that every imputed cell holds a value observed in its column.
pub fn audit_donors(x: &AmputedDataset, completed: &[CompleteDataset]) -> DonorAudit {
    let observed: Vec<Vec<f64>> = (0..x.ncols())
        .map(|j| x.observed_in_column(j).into_iter().map(|o| o.1).collect())
        .collect();
    let mut audit = DonorAudit::default();
    for c in completed {
        for (j, values) in observed.iter().enumerate() {
            for i in 0..x.nrows() {
                if x.is_na(i, j) {
                    audit.imputed_cells += 1;
                    if !values.contains(&c.get(i, j)) {
                        audit.violations += 1;
                    }
                }
            }
        }
    }
    audit
}

/// Linear-interpolation quantile of sorted data (the usual "type 7").
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellModel;

    fn data() -> CompleteDataset {
        CompleteDataset::from_rows(
            &(0..24)
                .map(|i| {
                    let a = i as f64 / 23.0;
                    vec![a, (a * 3.0) % 1.0, 1.0 - a]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn zero_probability_gives_zero_bias() {
        let cfg = BiasStudyConfig {
            target: 1,
            replications: 10,
            mechanisms: vec![Mechanism {
                label: "none".into(),
                model: LogisticMissModel::Global {
                    cell: CellModel::fixed(0.0),
                },
                copula: CopulaSpec::independence(3),
            }],
            estimator: Estimator::CompleteCase,
            pmm: PmmOptions::default(),
            seed: 4,
        };
        let report = run_bias_study(&data(), &cfg).unwrap();
        assert_eq!(report.samples.len(), 10);
        assert!(report.samples.iter().all(|s| s.bias == 0.0));
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = BiasStudyConfig {
            target: 0,
            replications: 3,
            mechanisms: vec![Mechanism {
                label: "all".into(),
                model: LogisticMissModel::Global {
                    cell: CellModel::fixed(1.0),
                },
                copula: CopulaSpec::independence(3),
            }],
            estimator: Estimator::CompleteCase,
            pmm: PmmOptions::default(),
            seed: 4,
        };
        let report = run_bias_study(&data(), &cfg).unwrap();
        assert_eq!(report.failures.len(), 3);
        assert_eq!(report.summaries[0].failed, 3);
        assert!(report.summaries[0].median.is_nan());
    }

    #[test]
    fn study_is_reproducible() {
        let cfg = BiasStudyConfig {
            target: 2,
            replications: 6,
            mechanisms: standard_mechanisms(3, 0.5).unwrap(),
            estimator: Estimator::PmmMice,
            pmm: PmmOptions {
                donors: 3,
                imputations: 2,
                iterations: 2,
                predictors: None,
            },
            seed: 99,
        };
        let a = run_bias_study(&data(), &cfg).unwrap();
        let b = run_bias_study(&data(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.donors.violations, 0);
    }
}
