use nalgebra::DMatrix;

use crate::dataset::CompleteDataset;
use crate::error::{Error, Result};

/// Map every column onto `[0, 1]` by `(x − min) / (max − min)` and
/// optionally stable-sort the rows by one column.
pub fn range_transform(y: &CompleteDataset, sort_by: Option<usize>) -> Result<CompleteDataset> {
    let (n, d) = (y.nrows(), y.ncols());
    if let Some(c) = sort_by.filter(|&c| c >= d) {
        return Err(Error::invalid("sort_by", format!("column {c} out of range for {d} columns")));
    }
    let mut ranges = Vec::with_capacity(d);
    for j in 0..d {
        let col = y.values().column(j);
        let (lo, hi) = (col.min(), col.max());
        if hi <= lo {
            return Err(Error::invalid(
                format!("column {}", y.names()[j]),
                "constant column cannot be range-transformed",
            ));
        }
        ranges.push((lo, hi));
    }
    let scaled = DMatrix::from_fn(n, d, |i, j| {
        let (lo, hi) = ranges[j];
        (y.get(i, j) - lo) / (hi - lo)
    });
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(c) = sort_by {
        order.sort_by(|&a, &b| scaled[(a, c)].total_cmp(&scaled[(b, c)]));
    }
    let sorted = DMatrix::from_fn(n, d, |i, j| scaled[(order[i], j)]);
    CompleteDataset::new(y.names().to_vec(), sorted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows_map_to_zero_and_one() {
        let y = CompleteDataset::from_rows(&[vec![3.0, 10.0], vec![7.0, -2.0]]).unwrap();
        let t = range_transform(&y, None).unwrap();
        assert_eq!(t.values().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn unit_column_unchanged() {
        let y = CompleteDataset::from_rows(&[vec![0.0], vec![0.25], vec![1.0]]).unwrap();
        assert_eq!(range_transform(&y, None).unwrap(), y);
    }

    #[test]
    fn constant_column_rejected() {
        let y = CompleteDataset::from_rows(&[vec![1.0, 2.0], vec![1.0, 3.0]]).unwrap();
        let err = range_transform(&y, None).unwrap_err();
        assert!(err.to_string().contains("V1"), "{err}");
    }

    #[test]
    fn sorting_is_stable() {
        let y = CompleteDataset::from_rows(&[
            vec![2.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![0.0, 3.0],
        ])
        .unwrap();
        let t = range_transform(&y, Some(0)).unwrap();
        let second: Vec<f64> = (0..4).map(|i| t.get(i, 1) * 3.0).collect();
        assert_eq!(second, vec![3.0, 1.0, 0.0, 2.0]);
    }
}
