//! Complete-case estimation, a small FCS imputer with predictive mean
//! matching, and the repeated-amputation bias study.

mod pmm;
pub mod study;

pub use pmm::{pmm_impute, PmmOptions};
pub use study::{run_bias_study, BiasSample, BiasStudyConfig, BiasStudyReport, Estimator, Mechanism};

use crate::dataset::AmputedDataset;
use crate::error::{Error, Result};

/// Mean of `column` over the rows that have no NA in any column.
pub fn complete_case_mean(x: &AmputedDataset, column: usize) -> Result<f64> {
    if column >= x.ncols() {
        return Err(Error::invalid(
            "column",
            format!("{column} out of range for {} columns", x.ncols()),
        ));
    }
    let (sum, count) = (0..x.nrows())
        .filter(|&i| (0..x.ncols()).all(|j| !x.is_na(i, j)))
        .fold((0.0, 0usize), |(s, c), i| {
            (s + x.get(i, column).expect("complete row"), c + 1)
        });
    if count == 0 {
        return Err(Error::NoCompleteCases);
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CompleteDataset, MissingnessMask};
    use crate::engine::apply_mask;

    fn fixture() -> CompleteDataset {
        CompleteDataset::from_rows(&[
            vec![1.0, 10.0],
            vec![2.0, 20.0],
            vec![3.0, 30.0],
            vec![4.0, 40.0],
            vec![5.0, 50.0],
        ])
        .unwrap()
    }

    #[test]
    fn no_missingness_is_plain_mean() {
        let y = fixture();
        let x = AmputedDataset::from(&y);
        assert_eq!(complete_case_mean(&x, 1).unwrap(), 30.0);
    }

    #[test]
    fn largest_rows_removed() {
        // mask the two largest values of column 1 through column 0
        let y = fixture();
        let m = MissingnessMask::from_fn(5, 2, |i, j| i >= 3 && j == 0);
        let x = apply_mask(&y, &m).unwrap();
        assert_eq!(complete_case_mean(&x, 1).unwrap(), (10.0 + 20.0 + 30.0) / 3.0);
    }

    #[test]
    fn single_and_zero_complete_rows() {
        let y = fixture();
        let m = MissingnessMask::from_fn(5, 2, |i, j| i != 2 && j == (i % 2));
        let x = apply_mask(&y, &m).unwrap();
        assert_eq!(complete_case_mean(&x, 1).unwrap(), 30.0);
        let x = apply_mask(&y, &MissingnessMask::from_fn(5, 2, |_, j| j == 0)).unwrap();
        assert!(matches!(complete_case_mean(&x, 1), Err(Error::NoCompleteCases)));
    }
}
