use nalgebra::DMatrix;

/// Largest negative (or unexplained) residual tolerated before a
/// correlation matrix is declared not positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NotPsd {
    pub index: usize,
    pub residual: f64,
}

/// Diagonally pivoted Cholesky factorisation of a positive semidefinite
/// matrix.
///
/// Returns `F` with shape `d × r` (`r` the numerical rank) such that
/// `F Fᵀ = a`, rows kept in the original index order.
pub fn pivoted_factor(a: &DMatrix<f64>) -> Result<DMatrix<f64>, NotPsd> {
    let d = a.nrows();
    let mut factor = DMatrix::<f64>::zeros(d, d);
    let mut residual: Vec<f64> = (0..d).map(|i| a[(i, i)]).collect();
    let mut used = vec![false; d];
    let mut rank = 0;

    while rank < d {
        let (pivot, &best) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("unused index remains");
        if best <= PSD_TOLERANCE {
            break;
        }
        let root = best.sqrt();
        used[pivot] = true;
        factor[(pivot, rank)] = root;
        for i in 0..d {
            if used[i] {
                continue;
            }
            let dot: f64 = (0..rank).map(|m| factor[(i, m)] * factor[(pivot, m)]).sum();
            let v = (a[(i, pivot)] - dot) / root;
            factor[(i, rank)] = v;
            residual[i] -= v * v;
        }
        residual[pivot] = 0.0;
        rank += 1;
    }

    // Remaining Schur complement must vanish.
    for i in (0..d).filter(|&i| !used[i]) {
        if residual[i] < -PSD_TOLERANCE {
            return Err(NotPsd {
                index: i,
                residual: residual[i],
            });
        }
        for j in (0..d).filter(|&j| !used[j] && j != i) {
            let dot: f64 = (0..rank).map(|m| factor[(i, m)] * factor[(j, m)]).sum();
            let off = a[(i, j)] - dot;
            if off.abs() > 10.0 * PSD_TOLERANCE {
                return Err(NotPsd {
                    index: i,
                    residual: off,
                });
            }
        }
    }
    Ok(factor.columns(0, rank).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 1.0, -0.3, 0.2, -0.3, 1.0]);
        let f = pivoted_factor(&a).unwrap();
        assert_eq!(f.ncols(), 3);
        assert!((&f * f.transpose() - &a).abs().max() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_reduced_rank() {
        let a = DMatrix::from_element(4, 4, 1.0);
        let f = pivoted_factor(&a).unwrap();
        assert_eq!(f.ncols(), 1);
        assert!((&f * f.transpose() - &a).abs().max() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0]);
        assert!(pivoted_factor(&a).is_err());
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(pivoted_factor(&b).is_err());
    }
}
