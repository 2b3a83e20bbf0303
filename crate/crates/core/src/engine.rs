//! Amputation: turning a complete dataset into an indicator matrix `M` and
//! an amputed dataset `X`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::copula::{row_stream, Copula, CopulaSpec};
use crate::dataset::{AmputedDataset, CompleteDataset, MissProbMatrix, MissingnessMask};
use crate::error::{Error, Result};
use crate::model::{compute_probs, LogisticMissModel};
use crate::rng;

/// Result of one amputation.
#[derive(Debug, Clone, PartialEq)]
pub struct Amputation {
    pub mask: MissingnessMask,
    pub amputed: AmputedDataset,
}

/// Whether to apply `U ← 1 − U` before thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurvivalFlip {
    /// Flip unless the copula is certified radially symmetric.
    #[default]
    Auto,
    Always,
}

impl SurvivalFlip {
    fn applies(self, copula: &Copula) -> bool {
        match self {
            SurvivalFlip::Auto => !copula.is_radially_symmetric(),
            SurvivalFlip::Always => true,
        }
    }
}

/// `X = NA` where `M = 1`, `Y` elsewhere.
pub fn apply_mask(y: &CompleteDataset, m: &MissingnessMask) -> Result<AmputedDataset> {
    if (y.nrows(), y.ncols()) != (m.nrows(), m.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "mask is {}x{}, data is {}x{}",
            m.nrows(),
            m.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let values = DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| {
        (!m.get(i, j)).then(|| y.get(i, j))
    });
    AmputedDataset::new(y.names().to_vec(), values)
}

fn finish(y: &CompleteDataset, mask: MissingnessMask) -> Result<Amputation> {
    let amputed = apply_mask(y, &mask)?;
    Ok(Amputation { mask, amputed })
}

fn check_probs(y: &CompleteDataset, p: &MissProbMatrix) -> Result<()> {
    if (y.nrows(), y.ncols()) != (p.nrows(), p.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "probabilities are {}x{}, data is {}x{}",
            p.nrows(),
            p.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(())
}

/// Rows drawn iid from `copula`: `M_{i,j} = 1{U_{i,j} ≤ p_{i,j}}`.
pub fn ampute_rows_iid(
    y: &CompleteDataset,
    p: &MissProbMatrix,
    copula: &Copula,
    seed: u64,
) -> Result<Amputation> {
    ampute_rows_iid_with(y, p, copula, seed, SurvivalFlip::Auto)
}

pub fn ampute_rows_iid_with(
    y: &CompleteDataset,
    p: &MissProbMatrix,
    copula: &Copula,
    seed: u64,
    flip: SurvivalFlip,
) -> Result<Amputation> {
    check_probs(y, p)?;
    if copula.dim() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "row copula has dimension {}, data has {} columns",
            copula.dim(),
            y.ncols()
        )));
    }
    let rows = vec![copula; y.nrows()];
    finish(y, threshold_rows(p, &rows, seed, flip))
}

/// One copula per row (rows independent of each other). With all copulas
/// equal this produces exactly the output of [`ampute_rows_iid`].
pub fn ampute_rows_independent(
    y: &CompleteDataset,
    p: &MissProbMatrix,
    copulas: &[Copula],
    seed: u64,
) -> Result<Amputation> {
    check_probs(y, p)?;
    if copulas.len() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} row copulas for {} rows",
            copulas.len(),
            y.nrows()
        )));
    }
    if let Some((i, c)) = copulas.iter().enumerate().find(|(_, c)| c.dim() != y.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "row copula {i} has dimension {}, data has {} columns",
            c.dim(),
            y.ncols()
        )));
    }
    let rows: Vec<&Copula> = copulas.iter().collect();
    finish(y, threshold_rows(p, &rows, seed, SurvivalFlip::Auto))
}

fn threshold_rows(
    p: &MissProbMatrix,
    copulas: &[&Copula],
    seed: u64,
    flip: SurvivalFlip,
) -> MissingnessMask {
    let (n, d) = (p.nrows(), p.ncols());
    let rows: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let copula = copulas[i];
            let mut u = vec![0.0; d];
            copula.sample_into(&mut row_stream(seed, i), &mut u);
            let flipped = flip.applies(copula);
            (0..d)
                .map(|j| {
                    let v = if flipped { 1.0 - u[j] } else { u[j] };
                    v <= p.get(i, j)
                })
                .collect()
        })
        .collect();
    MissingnessMask::from_fn(n, d, |i, j| rows[i][j])
}

/// Compute `P` from a logistic model and ampute with iid row copulas.
pub fn ampute_mechanism(
    y: &CompleteDataset,
    model: &LogisticMissModel,
    copula: &Copula,
    seed: u64,
) -> Result<(Amputation, MissProbMatrix)> {
    let p = compute_probs(model, y)?;
    let out = ampute_rows_iid(y, &p, copula, seed)?;
    Ok((out, p))
}

/// Axis-aligned block of cells, bounds inclusive and 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub rows: [usize; 2],
    pub columns: [usize; 2],
}

/// A set of cells that go missing together with probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSetGroup {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rects: Vec<CellRect>,
    pub p: f64,
}

impl CellSetGroup {
    pub fn new(cells: Vec<(usize, usize)>, p: f64) -> Self {
        Self {
            cells,
            rects: Vec::new(),
            p,
        }
    }

    pub fn rect(rows: [usize; 2], columns: [usize; 2], p: f64) -> Self {
        Self {
            cells: Vec::new(),
            rects: vec![CellRect { rows, columns }],
            p,
        }
    }

    /// Every cell, explicit ones first, then rectangles row by row.
    pub fn all_cells(&self) -> Vec<(usize, usize)> {
        let mut out = self.cells.clone();
        for r in &self.rects {
            for i in r.rows[0]..=r.rows[1] {
                for j in r.columns[0]..=r.columns[1] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSetGroupSpec {
    pub groups: Vec<CellSetGroup>,
    /// Dependence between the groups; dimension equals the number of groups.
    pub cross_copula: CopulaSpec,
    /// Probability for cells outside every group.
    #[serde(default)]
    pub default_p: f64,
}

/// Grouped cell-set amputation. Each group shares one uniform `V_k` drawn
/// from the cross copula, so the cells of a group are missing together.
/// Cells outside all groups are amputed independently with `default_p`.
pub fn ampute_cell_sets(
    y: &CompleteDataset,
    spec: &CellSetGroupSpec,
    seed: u64,
) -> Result<Amputation> {
    let (n, d) = (y.nrows(), y.ncols());
    let mut owner: DMatrix<Option<usize>> = DMatrix::from_element(n, d, None);
    for (k, group) in spec.groups.iter().enumerate() {
        if !(0.0..=1.0).contains(&group.p) {
            return Err(Error::invalid(format!("groups[{k}].p"), format!("{} outside [0, 1]", group.p)));
        }
        for (i, j) in group.all_cells() {
            if i >= n || j >= d {
                return Err(Error::invalid(
                    format!("groups[{k}]"),
                    format!("cell ({i},{j}) outside the {n}x{d} data"),
                ));
            }
            if let Some(other) = owner[(i, j)] {
                if other != k {
                    return Err(Error::invalid(
                        format!("groups[{k}]"),
                        format!("overlapping cell sets: cell ({i},{j}) also in group {other}"),
                    ));
                }
            }
            owner[(i, j)] = Some(k);
        }
    }
    if !(0.0..=1.0).contains(&spec.default_p) {
        return Err(Error::invalid("default_p", format!("{} outside [0, 1]", spec.default_p)));
    }
    let cross = Copula::new(spec.cross_copula.clone())?;
    if cross.dim() != spec.groups.len() {
        return Err(Error::DimensionMismatch(format!(
            "cross copula has dimension {}, there are {} groups",
            cross.dim(),
            spec.groups.len()
        )));
    }

    let mut v = vec![0.0; cross.dim()];
    cross.sample_into(&mut rng::stream(seed, &[rng::TAG_CELL_SETS]), &mut v);
    if SurvivalFlip::Auto.applies(&cross) {
        v.iter_mut().for_each(|x| *x = 1.0 - *x);
    }
    let group_missing: Vec<bool> = v.iter().zip(&spec.groups).map(|(v, g)| *v <= g.p).collect();

    let rows: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut bg = rng::stream(seed, &[rng::TAG_BACKGROUND, i as u64]);
            (0..d)
                .map(|j| {
                    let u = rng::open_uniform(&mut bg);
                    match owner[(i, j)] {
                        Some(k) => group_missing[k],
                        None => u <= spec.default_p,
                    }
                })
                .collect()
        })
        .collect();
    finish(y, MissingnessMask::from_fn(n, d, |i, j| rows[i][j]))
}

/// Cheek dependence in the smiley example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cheeks {
    /// Both cheeks in one group: both or neither go missing.
    Together,
    /// Separate groups joined by a countermonotone copula: exactly one goes.
    OneOfTwo,
}

/// 0-based `(row, column)` cells.
pub type Cells = Vec<(usize, usize)>;

/// Cells of the smiley face drawn on a 32 × 11 grid:
/// `(eyes and mouth, left cheek, right cheek)`.
pub fn smiley_cells() -> (Cells, Cells, Cells) {
    let block = |rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>| {
        rows.flat_map(move |i| cols.clone().map(move |j| (i, j)))
            .collect::<Vec<_>>()
    };
    let mut face = block(7..=9, 2..=3);
    face.extend(block(7..=9, 7..=8));
    face.extend(block(21..=21, 1..=1));
    face.extend(block(21..=21, 9..=9));
    face.extend(block(22..=23, 2..=8));
    (face, block(15..=17, 1..=2), block(15..=17, 8..=9))
}

/// The smiley example: eyes and mouth always missing, cheeks missing with
/// probability 1/2, everything else observed.
pub fn smiley_spec(cheeks: Cheeks) -> CellSetGroupSpec {
    let (face, left, right) = smiley_cells();
    match cheeks {
        Cheeks::Together => CellSetGroupSpec {
            groups: vec![
                CellSetGroup::new(face, 1.0),
                CellSetGroup::new([left, right].concat(), 0.5),
            ],
            cross_copula: CopulaSpec::independence(2),
            default_p: 0.0,
        },
        Cheeks::OneOfTwo => CellSetGroupSpec {
            groups: vec![
                CellSetGroup::new(face, 1.0),
                CellSetGroup::new(left, 0.5),
                CellSetGroup::new(right, 0.5),
            ],
            cross_copula: CopulaSpec::block_product(vec![
                (vec![0], CopulaSpec::independence(1)),
                (vec![1, 2], CopulaSpec::countermonotone()),
            ]),
            default_p: 0.0,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneMixtureSpec {
    /// Probability that a row has any missing values.
    pub miss_row_prob: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Copula of `(U_1, …, U_n)` across rows.
    pub row_dependence: CopulaSpec,
}

/// Per-row cut-offs `J_i ∈ {0, …, d}` of a monotone mixture; columns
/// `j ≥ J_i` (0-based) are missing.
pub fn monotone_cutoffs(n: usize, d: usize, spec: &MonotoneMixtureSpec, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&spec.miss_row_prob) {
        return Err(Error::invalid(
            "miss_row_prob",
            format!("{} outside [0, 1]", spec.miss_row_prob),
        ));
    }
    let beta = Beta::new(spec.alpha, spec.beta).map_err(|e| {
        Error::invalid("alpha", format!("Beta({}, {}): {e}", spec.alpha, spec.beta))
    })?;
    let copula = Copula::new(spec.row_dependence.clone())?;
    if copula.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "row dependence copula has dimension {}, data has {n} rows",
            copula.dim()
        )));
    }
    let mut u = vec![0.0; n];
    copula.sample_into(&mut rng::stream(seed, &[rng::TAG_MIXTURE]), &mut u);
    let mut selector = rng::stream(seed, &[rng::TAG_MIXTURE, 1]);
    Ok(u
        .iter()
        .map(|&ui| {
            if rng::open_uniform(&mut selector) <= spec.miss_row_prob {
                let j = (d as f64 * beta.inverse_cdf(ui)).ceil() as usize;
                j.saturating_sub(1).min(d - 1)
            } else {
                d
            }
        })
        .collect())
}

/// Monotone-missingness mixture: with probability `1 − miss_row_prob` a row
/// is complete, otherwise it drops out from column `J_i = ⌈d·F⁻¹(U_i)⌉ − 1`
/// onwards, with `F` the Beta(α, β) distribution function.
pub fn ampute_monotone_mixture(
    y: &CompleteDataset,
    spec: &MonotoneMixtureSpec,
    seed: u64,
) -> Result<Amputation> {
    let (n, d) = (y.nrows(), y.ncols());
    if d == 0 {
        return Err(Error::invalid("data", "no columns"));
    }
    let cut = monotone_cutoffs(n, d, spec, seed)?;
    finish(y, MissingnessMask::from_fn(n, d, |i, j| j >= cut[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, d: usize) -> CompleteDataset {
        CompleteDataset::from_rows(
            &(0..n)
                .map(|i| (0..d).map(|j| (i * d + j) as f64).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn cop(spec: CopulaSpec) -> Copula {
        Copula::new(spec).unwrap()
    }

    #[test]
    fn degenerate_probabilities() {
        let y = grid(20, 4);
        for spec in [
            CopulaSpec::independence(4),
            CopulaSpec::comonotone(4),
            CopulaSpec::homogeneous_gauss(0.5, 4),
        ] {
            let c = cop(spec);
            let none = ampute_rows_iid(&y, &MissProbMatrix::constant(20, 4, 0.0).unwrap(), &c, 1).unwrap();
            assert_eq!(none.mask.count_missing(), 0);
            assert_eq!(none.amputed, AmputedDataset::from(&y));
            let all = ampute_rows_iid(&y, &MissProbMatrix::constant(20, 4, 1.0).unwrap(), &c, 1).unwrap();
            assert_eq!(all.mask.count_missing(), 80);
        }
    }

    #[test]
    fn comonotone_rows_all_or_nothing() {
        let y = grid(30_000, 11);
        let p = MissProbMatrix::constant(30_000, 11, 1.0 / 3.0).unwrap();
        let out = ampute_rows_iid(&y, &p, &cop(CopulaSpec::comonotone(11)), 5).unwrap();
        let mut full = 0;
        for i in 0..30_000 {
            let k = out.mask.row_missing_count(i);
            assert!(k == 0 || k == 11);
            full += (k == 11) as usize;
        }
        let frac = full as f64 / 30_000.0;
        assert!((frac - 1.0 / 3.0).abs() < 0.015, "{frac}");
    }

    #[test]
    fn equal_row_copulas_match_iid() {
        let y = grid(50, 3);
        let p = MissProbMatrix::constant(50, 3, 0.4).unwrap();
        let c = cop(CopulaSpec::homogeneous_gauss(0.3, 3));
        let a = ampute_rows_iid(&y, &p, &c, 17).unwrap();
        let b = ampute_rows_independent(&y, &p, &vec![c.clone(); 50], 17).unwrap();
        assert_eq!(a, b);
        assert!(ampute_rows_independent(&y, &p, &vec![c; 49], 17).is_err());
    }

    #[test]
    fn apply_mask_places_na() {
        let y = grid(2, 2);
        let m = MissingnessMask::from_fn(2, 2, |i, j| i == j);
        let x = apply_mask(&y, &m).unwrap();
        assert!(x.is_na(0, 0) && x.is_na(1, 1));
        assert_eq!(x.get(0, 1), Some(1.0));
        assert_eq!(x.get(1, 0), Some(2.0));
        assert_eq!(x.mask(), m);
        assert!(apply_mask(&y, &MissingnessMask::zeros(3, 2)).is_err());
    }

    #[test]
    fn overlapping_cell_sets_rejected() {
        let y = grid(4, 4);
        let spec = CellSetGroupSpec {
            groups: vec![
                CellSetGroup::rect([0, 1], [0, 1], 0.5),
                CellSetGroup::new(vec![(1, 1)], 0.5),
            ],
            cross_copula: CopulaSpec::independence(2),
            default_p: 0.0,
        };
        let err = ampute_cell_sets(&y, &spec, 1).unwrap_err();
        assert!(err.to_string().contains("overlapping"), "{err}");
    }

    #[test]
    fn survey_blocks_are_deterministic() {
        let y = grid(10, 3);
        let spec = CellSetGroupSpec {
            groups: vec![
                CellSetGroup::rect([0, 3], [1, 1], 1.0),
                CellSetGroup::rect([4, 9], [2, 2], 1.0),
            ],
            cross_copula: CopulaSpec::countermonotone(),
            default_p: 0.0,
        };
        for seed in 0..20 {
            let m = ampute_cell_sets(&y, &spec, seed).unwrap().mask;
            let expected = MissingnessMask::from_fn(10, 3, |i, j| (j == 1 && i < 4) || (j == 2 && i >= 4));
            assert_eq!(m, expected);
        }
    }

    #[test]
    fn smiley_groups_do_not_overlap() {
        let y = grid(32, 11);
        for cheeks in [Cheeks::Together, Cheeks::OneOfTwo] {
            let m = ampute_cell_sets(&y, &smiley_spec(cheeks), 3).unwrap().mask;
            let (face, _, _) = smiley_cells();
            assert!(face.iter().all(|&(i, j)| m.get(i, j)));
        }
    }

    #[test]
    fn monotone_rows_are_sorted() {
        let y = grid(32, 11);
        let spec = MonotoneMixtureSpec {
            miss_row_prob: 1.0 / 3.0,
            alpha: 1.0,
            beta: 4.0,
            row_dependence: CopulaSpec::homogeneous_gauss(0.7181, 32),
        };
        for seed in 0..50 {
            let m = ampute_monotone_mixture(&y, &spec, seed).unwrap().mask;
            for i in 0..32 {
                let row = m.row(i);
                assert!(row.windows(2).all(|w| !w[0] || w[1]));
            }
        }
    }

    #[test]
    fn monotone_validation() {
        let y = grid(5, 3);
        let mut spec = MonotoneMixtureSpec {
            miss_row_prob: 0.5,
            alpha: 0.0,
            beta: 1.0,
            row_dependence: CopulaSpec::independence(5),
        };
        assert!(ampute_monotone_mixture(&y, &spec, 1).is_err());
        spec.alpha = 1.0;
        spec.row_dependence = CopulaSpec::independence(4);
        assert!(ampute_monotone_mixture(&y, &spec, 1).is_err());
    }
}
