//! Copula construction, sampling and evaluation.
//!
//! [`CopulaSpec`] is the declarative, serialisable description. It is
//! validated and compiled into a [`Copula`], which caches the Cholesky
//! factors needed for Gauss sampling and answers CDF queries.

pub mod cholesky;
pub mod normal;

use nalgebra::DMatrix;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Inclusion–exclusion is evaluated exactly up to this dimension.
pub const DEFAULT_SURVIVAL_CAP: usize = 12;

/// Minimum number of draws accepted by [`Copula::mc_cdf`].
pub const MIN_MC_SAMPLES: usize = 1000;

const MATRIX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CopulaSpec {
    Independence {
        dim: usize,
    },
    Comonotone {
        dim: usize,
    },
    /// Only defined for `dim = 2`.
    Countermonotone {
        #[serde(default = "two")]
        dim: usize,
    },
    Gauss {
        correlation: Vec<Vec<f64>>,
    },
    /// Gauss copula with parameter matrix `ρJ + (1−ρ)I`, `ρ ∈ [0, 1]`.
    HomogeneousGauss {
        rho: f64,
        dim: usize,
    },
    Survival {
        inner: Box<CopulaSpec>,
    },
    ConvexCombination {
        lambda: f64,
        first: Box<CopulaSpec>,
        second: Box<CopulaSpec>,
    },
    BlockProduct {
        blocks: Vec<Block>,
    },
}

/// One factor of a [`CopulaSpec::BlockProduct`]: the coordinates it covers
/// (0-based) and the copula among them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub indices: Vec<usize>,
    pub copula: CopulaSpec,
}

fn two() -> usize {
    2
}

impl CopulaSpec {
    pub fn independence(dim: usize) -> Self {
        Self::Independence { dim }
    }

    pub fn comonotone(dim: usize) -> Self {
        Self::Comonotone { dim }
    }

    pub fn countermonotone() -> Self {
        Self::Countermonotone { dim: 2 }
    }

    pub fn gauss(correlation: Vec<Vec<f64>>) -> Self {
        Self::Gauss { correlation }
    }

    pub fn homogeneous_gauss(rho: f64, dim: usize) -> Self {
        Self::HomogeneousGauss { rho, dim }
    }

    pub fn survival(inner: CopulaSpec) -> Self {
        Self::Survival {
            inner: Box::new(inner),
        }
    }

    pub fn convex(lambda: f64, first: CopulaSpec, second: CopulaSpec) -> Self {
        Self::ConvexCombination {
            lambda,
            first: Box::new(first),
            second: Box::new(second),
        }
    }

    pub fn block_product(blocks: Vec<(Vec<usize>, CopulaSpec)>) -> Self {
        Self::BlockProduct {
            blocks: blocks
                .into_iter()
                .map(|(indices, copula)| Block { indices, copula })
                .collect(),
        }
    }

    /// Declared dimension (not validated).
    pub fn dim(&self) -> usize {
        match self {
            Self::Independence { dim }
            | Self::Comonotone { dim }
            | Self::Countermonotone { dim }
            | Self::HomogeneousGauss { dim, .. } => *dim,
            Self::Gauss { correlation } => correlation.len(),
            Self::Survival { inner } => inner.dim(),
            Self::ConvexCombination { first, .. } => first.dim(),
            Self::BlockProduct { blocks } => blocks.iter().map(|b| b.indices.len()).sum(),
        }
    }

    /// Marginal copula of the coordinates `indices`, in the given order.
    pub fn marginal(&self, indices: &[usize]) -> Result<CopulaSpec> {
        let dim = self.dim();
        if indices.is_empty() {
            return Err(Error::invalid("indices", "empty marginal"));
        }
        let mut seen = vec![false; dim];
        for &i in indices {
            if i >= dim {
                return Err(Error::invalid("indices", format!("{i} out of range for dim {dim}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("indices", format!("{i} repeated")));
            }
        }
        let k = indices.len();
        Ok(match self {
            Self::Independence { .. } => Self::independence(k),
            Self::Comonotone { .. } => Self::comonotone(k),
            Self::Countermonotone { .. } if k == 2 => self.clone(),
            Self::Countermonotone { .. } => Self::independence(1),
            Self::Gauss { correlation } => Self::gauss(
                indices
                    .iter()
                    .map(|&a| indices.iter().map(|&b| correlation[a][b]).collect())
                    .collect(),
            ),
            Self::HomogeneousGauss { rho, .. } => Self::homogeneous_gauss(*rho, k),
            Self::Survival { inner } => Self::survival(inner.marginal(indices)?),
            Self::ConvexCombination {
                lambda,
                first,
                second,
            } => Self::convex(*lambda, first.marginal(indices)?, second.marginal(indices)?),
            Self::BlockProduct { blocks } => {
                let mut out = Vec::new();
                for block in blocks {
                    let mut local = Vec::new();
                    let mut positions = Vec::new();
                    for (pos, i) in indices.iter().enumerate() {
                        if let Some(l) = block.indices.iter().position(|b| b == i) {
                            local.push(l);
                            positions.push(pos);
                        }
                    }
                    if !local.is_empty() {
                        out.push((positions, block.copula.marginal(&local)?));
                    }
                }
                Self::block_product(out)
            }
        })
    }
}

/// `n_rows × dim` uniforms, row-major, every entry inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSample {
    n_rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl UniformSample {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Monte-Carlo CDF estimate with its 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width_95: f64,
    pub n_samples: usize,
}

/// A validated copula ready for sampling and evaluation.
#[derive(Debug, Clone)]
pub struct Copula {
    spec: CopulaSpec,
    node: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Independence(usize),
    Comonotone(usize),
    Countermonotone,
    Gauss {
        corr: DMatrix<f64>,
        factor: DMatrix<f64>,
    },
    HomogeneousGauss {
        rho: f64,
        dim: usize,
    },
    Survival(Box<Node>),
    Convex {
        lambda: f64,
        first: Box<Node>,
        second: Box<Node>,
    },
    Blocks {
        dim: usize,
        blocks: Vec<(Vec<usize>, Node)>,
    },
}

impl Copula {
    pub fn new(spec: CopulaSpec) -> Result<Self> {
        let node = compile(&spec, "copula")?;
        Ok(Self { spec, node })
    }

    pub fn spec(&self) -> &CopulaSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.node.dim()
    }

    /// Structural certificate that `C̄ = C`. Leaves (independence,
    /// comonotone, countermonotone, Gauss) are radially symmetric, and the
    /// property is inherited by survival transforms, convex combinations and
    /// block products.
    pub fn is_radially_symmetric(&self) -> bool {
        self.node.is_radially_symmetric()
    }

    pub fn marginal(&self, indices: &[usize]) -> Result<Copula> {
        Copula::new(self.spec.marginal(indices)?)
    }

    /// Draw one row into `out` (length `dim`).
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        self.node.sample_into(rng, out);
        for u in out.iter_mut() {
            *u = rng::clamp_open(*u);
        }
    }

    /// `n_rows` independent rows. Row `i` is drawn from its own stream
    /// derived from `(seed, i)`, so the result does not depend on how rows
    /// are distributed across threads.
    pub fn sample(&self, n_rows: usize, seed: u64) -> Result<UniformSample> {
        if n_rows == 0 {
            return Err(Error::invalid("n_rows", "must be at least 1"));
        }
        let dim = self.dim();
        let mut data = vec![0.0; n_rows * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
            let mut rng = row_stream(seed, i);
            self.sample_into(&mut rng, row);
        });
        Ok(UniformSample { n_rows, dim, data })
    }

    pub fn cdf(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        if point.contains(&0.0) {
            return Ok(0.0);
        }
        self.node.cdf(point)
    }

    /// Survival copula `C̄` at `point`, using `C̄ = C` when radial symmetry
    /// is certified and inclusion–exclusion otherwise.
    pub fn survival_cdf(&self, point: &[f64]) -> Result<f64> {
        self.survival_cdf_with_cap(point, DEFAULT_SURVIVAL_CAP)
    }

    pub fn survival_cdf_with_cap(&self, point: &[f64], cap: usize) -> Result<f64> {
        if self.is_radially_symmetric() {
            self.cdf(point)
        } else {
            self.survival_cdf_inclusion_exclusion(point, cap)
        }
    }

    /// `C̄(u) = Σ_{T ⊆ {1..d}} (−1)^{|T|} C(v_T)` with `v_j = 1 − u_j` for
    /// `j ∈ T` and `1` otherwise; `2^d` evaluations of `C`.
    pub fn survival_cdf_inclusion_exclusion(&self, point: &[f64], cap: usize) -> Result<f64> {
        self.check_point(point)?;
        inclusion_exclusion(&self.node, point, cap)
    }

    /// Fraction of `n_samples` draws lying componentwise below `point`.
    pub fn mc_cdf(&self, point: &[f64], n_samples: usize, seed: u64) -> Result<McEstimate> {
        self.check_point(point)?;
        if n_samples < MIN_MC_SAMPLES {
            return Err(Error::invalid(
                "n_samples",
                format!("{n_samples} < {MIN_MC_SAMPLES}"),
            ));
        }
        let dim = self.dim();
        let hits = (0..n_samples)
            .into_par_iter()
            .map_init(
                || vec![0.0; dim],
                |row, i| {
                    let mut rng = row_stream(seed, i);
                    self.sample_into(&mut rng, row);
                    row.iter().zip(point).all(|(u, p)| u <= p)
                },
            )
            .filter(|&hit| hit)
            .count();
        let estimate = hits as f64 / n_samples as f64;
        Ok(McEstimate {
            estimate,
            half_width_95: 1.96 * (estimate * (1.0 - estimate) / n_samples as f64).sqrt(),
            n_samples,
        })
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for copula of dimension {}",
                point.len(),
                self.dim()
            )));
        }
        if let Some(u) = point.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return Err(Error::invalid("point", format!("{u} outside [0, 1]")));
        }
        Ok(())
    }
}

pub(crate) fn row_stream(seed: u64, row: usize) -> rng::StreamRng {
    rng::stream(seed, &[rng::TAG_COPULA_ROWS, row as u64])
}

fn compile(spec: &CopulaSpec, path: &str) -> Result<Node> {
    match spec {
        CopulaSpec::Independence { dim } | CopulaSpec::Comonotone { dim } => {
            if *dim == 0 {
                return Err(Error::invalid(format!("{path}.dim"), "must be at least 1"));
            }
            Ok(if matches!(spec, CopulaSpec::Independence { .. }) {
                Node::Independence(*dim)
            } else {
                Node::Comonotone(*dim)
            })
        }
        CopulaSpec::Countermonotone { dim } => {
            if *dim != 2 {
                return Err(Error::invalid(
                    format!("{path}.dim"),
                    format!("countermonotone copula requires dim 2, got {dim}"),
                ));
            }
            Ok(Node::Countermonotone)
        }
        CopulaSpec::Gauss { correlation } => {
            let field = format!("{path}.correlation");
            let corr = correlation_matrix(correlation, &field)?;
            let factor = cholesky::pivoted_factor(&corr).map_err(|e| {
                Error::invalid(
                    &field,
                    format!(
                        "not positive semidefinite (residual {:.3e} at index {})",
                        e.residual, e.index
                    ),
                )
            })?;
            Ok(Node::Gauss { corr, factor })
        }
        CopulaSpec::HomogeneousGauss { rho, dim } => {
            if !(0.0..=1.0).contains(rho) {
                return Err(Error::invalid(format!("{path}.rho"), format!("{rho} outside [0, 1]")));
            }
            if *dim == 0 {
                return Err(Error::invalid(format!("{path}.dim"), "must be at least 1"));
            }
            Ok(Node::HomogeneousGauss {
                rho: *rho,
                dim: *dim,
            })
        }
        CopulaSpec::Survival { inner } => Ok(Node::Survival(Box::new(compile(
            inner,
            &format!("{path}.inner"),
        )?))),
        CopulaSpec::ConvexCombination {
            lambda,
            first,
            second,
        } => {
            if !(0.0..=1.0).contains(lambda) {
                return Err(Error::invalid(
                    format!("{path}.lambda"),
                    format!("{lambda} outside [0, 1]"),
                ));
            }
            let first = compile(first, &format!("{path}.first"))?;
            let second = compile(second, &format!("{path}.second"))?;
            if first.dim() != second.dim() {
                return Err(Error::invalid(
                    format!("{path}.second"),
                    format!("dimension {} differs from first ({})", second.dim(), first.dim()),
                ));
            }
            Ok(Node::Convex {
                lambda: *lambda,
                first: Box::new(first),
                second: Box::new(second),
            })
        }
        CopulaSpec::BlockProduct { blocks } => {
            if blocks.is_empty() {
                return Err(Error::invalid(format!("{path}.blocks"), "no blocks"));
            }
            let dim: usize = blocks.iter().map(|b| b.indices.len()).sum();
            let mut seen = vec![false; dim];
            let mut compiled = Vec::with_capacity(blocks.len());
            for (k, block) in blocks.iter().enumerate() {
                let field = format!("{path}.blocks[{k}]");
                if block.indices.is_empty() {
                    return Err(Error::invalid(format!("{field}.indices"), "empty index set"));
                }
                for &i in &block.indices {
                    if i >= dim || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::invalid(
                            format!("{field}.indices"),
                            format!("index sets must partition 0..{dim}; offending index {i}"),
                        ));
                    }
                }
                let child = compile(&block.copula, &format!("{field}.copula"))?;
                if child.dim() != block.indices.len() {
                    return Err(Error::invalid(
                        format!("{field}.copula"),
                        format!(
                            "dimension {} does not match {} indices",
                            child.dim(),
                            block.indices.len()
                        ),
                    ));
                }
                compiled.push((block.indices.clone(), child));
            }
            Ok(Node::Blocks {
                dim,
                blocks: compiled,
            })
        }
    }
}

fn correlation_matrix(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::invalid(field, "empty matrix"));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid(field, "matrix is not square"));
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    for i in 0..d {
        if (m[(i, i)] - 1.0).abs() > MATRIX_TOLERANCE {
            return Err(Error::invalid(field, format!("diagonal entry {i} is {}", m[(i, i)])));
        }
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if !a.is_finite() || !b.is_finite() || a.abs() > 1.0 {
                return Err(Error::invalid(field, format!("entry ({i},{j}) = {a} is not a correlation")));
            }
            if (a - b).abs() > MATRIX_TOLERANCE {
                return Err(Error::invalid(field, format!("not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(m)
}

fn inclusion_exclusion(node: &Node, point: &[f64], cap: usize) -> Result<f64> {
    let d = point.len();
    if d > cap {
        return Err(Error::UseMonteCarlo(format!(
            "inclusion-exclusion needs 2^{d} terms, cap is dimension {cap}"
        )));
    }
    let mut corner = vec![1.0; d];
    let mut total = 0.0;
    for subset in 0u64..(1u64 << d) {
        let mut any_zero = false;
        for (j, v) in corner.iter_mut().enumerate() {
            *v = if subset >> j & 1 == 1 { 1.0 - point[j] } else { 1.0 };
            any_zero |= *v == 0.0;
        }
        if any_zero {
            continue;
        }
        let term = node.cdf(&corner)?;
        if subset.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

fn gauss_active_cdf(point: &[f64], rho: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let active: Vec<usize> = (0..point.len()).filter(|&j| point[j] < 1.0).collect();
    match active.as_slice() {
        [] => Ok(1.0),
        [a] => Ok(point[*a]),
        [a, b] => Ok(normal::bivariate_cdf(
            normal::quantile(point[*a]),
            normal::quantile(point[*b]),
            rho(*a, *b),
        )),
        more => Err(Error::UseMonteCarlo(format!(
            "exact Gauss copula CDF is limited to 2 non-unit coordinates, got {}",
            more.len()
        ))),
    }
}

impl Node {
    fn dim(&self) -> usize {
        match self {
            Node::Independence(d) | Node::Comonotone(d) => *d,
            Node::Countermonotone => 2,
            Node::Gauss { corr, .. } => corr.nrows(),
            Node::HomogeneousGauss { dim, .. } => *dim,
            Node::Survival(inner) => inner.dim(),
            Node::Convex { first, .. } => first.dim(),
            Node::Blocks { dim, .. } => *dim,
        }
    }

    fn is_radially_symmetric(&self) -> bool {
        match self {
            Node::Independence(_)
            | Node::Comonotone(_)
            | Node::Countermonotone
            | Node::Gauss { .. }
            | Node::HomogeneousGauss { .. } => true,
            Node::Survival(inner) => inner.is_radially_symmetric(),
            Node::Convex { first, second, .. } => {
                first.is_radially_symmetric() && second.is_radially_symmetric()
            }
            Node::Blocks { blocks, .. } => blocks.iter().all(|(_, b)| b.is_radially_symmetric()),
        }
    }

    fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Node::Independence(_) => out.iter_mut().for_each(|u| *u = rng::open_uniform(rng)),
            Node::Comonotone(_) => out.fill(rng::open_uniform(rng)),
            Node::Countermonotone => {
                let u = rng::open_uniform(rng);
                out[0] = u;
                out[1] = 1.0 - u;
            }
            Node::Gauss { factor, .. } => {
                let z: Vec<f64> = (0..factor.ncols())
                    .map(|_| normal::quantile(rng::open_uniform(rng)))
                    .collect();
                for (i, u) in out.iter_mut().enumerate() {
                    let w: f64 = z.iter().enumerate().map(|(k, zk)| factor[(i, k)] * zk).sum();
                    *u = normal::cdf(w);
                }
            }
            Node::HomogeneousGauss { rho, .. } => {
                // One-factor representation W_j = √ρ Z_0 + √(1−ρ) Z_j.
                let common = rho.sqrt() * normal::quantile(rng::open_uniform(rng));
                let own = (1.0 - rho).sqrt();
                for u in out.iter_mut() {
                    let z = normal::quantile(rng::open_uniform(rng));
                    *u = normal::cdf(common + own * z);
                }
            }
            Node::Survival(inner) => {
                inner.sample_into(rng, out);
                out.iter_mut().for_each(|u| *u = 1.0 - *u);
            }
            Node::Convex {
                lambda,
                first,
                second,
            } => {
                if rng::open_uniform(rng) <= *lambda {
                    first.sample_into(rng, out);
                } else {
                    second.sample_into(rng, out);
                }
            }
            Node::Blocks { blocks, .. } => {
                for (indices, child) in blocks {
                    let mut buf = vec![0.0; indices.len()];
                    child.sample_into(rng, &mut buf);
                    for (&i, v) in indices.iter().zip(buf) {
                        out[i] = v;
                    }
                }
            }
        }
    }

    fn cdf(&self, point: &[f64]) -> Result<f64> {
        if point.iter().any(|&u| u <= 0.0) {
            return Ok(0.0);
        }
        match self {
            Node::Independence(_) => Ok(point.iter().product()),
            Node::Comonotone(_) => Ok(point.iter().copied().fold(1.0, f64::min)),
            Node::Countermonotone => Ok((point[0] + point[1] - 1.0).max(0.0)),
            Node::Gauss { corr, .. } => gauss_active_cdf(point, |a, b| corr[(a, b)]),
            Node::HomogeneousGauss { rho, .. } => gauss_active_cdf(point, |_, _| *rho),
            Node::Survival(inner) => {
                if inner.is_radially_symmetric() {
                    inner.cdf(point)
                } else {
                    inclusion_exclusion(inner, point, DEFAULT_SURVIVAL_CAP)
                }
            }
            Node::Convex {
                lambda,
                first,
                second,
            } => {
                let a = if *lambda > 0.0 { first.cdf(point)? } else { 0.0 };
                let b = if *lambda < 1.0 { second.cdf(point)? } else { 0.0 };
                Ok(lambda * a + (1.0 - lambda) * b)
            }
            Node::Blocks { blocks, .. } => {
                let mut value = 1.0;
                for (indices, child) in blocks {
                    let sub: Vec<f64> = indices.iter().map(|&i| point[i]).collect();
                    value *= child.cdf(&sub)?;
                }
                Ok(value)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn copula(spec: CopulaSpec) -> Copula {
        Copula::new(spec).unwrap()
    }

    #[test]
    fn elementary_cdf_values() {
        assert_eq!(copula(CopulaSpec::independence(2)).cdf(&[0.5, 0.5]).unwrap(), 0.25);
        let w = copula(CopulaSpec::countermonotone());
        assert!((w.cdf(&[0.7, 0.6]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(w.cdf(&[0.3, 0.6]).unwrap(), 0.0);
        assert_eq!(copula(CopulaSpec::comonotone(3)).cdf(&[0.2, 0.9, 0.4]).unwrap(), 0.2);
    }

    #[test]
    fn validation_names_the_offending_field() {
        let err = Copula::new(CopulaSpec::Countermonotone { dim: 3 }).unwrap_err();
        assert!(err.to_string().contains("copula.dim"), "{err}");

        let bad = CopulaSpec::gauss(vec![
            vec![1.0, 0.9, 0.9],
            vec![0.9, 1.0, -0.9],
            vec![0.9, -0.9, 1.0],
        ]);
        let err = Copula::new(CopulaSpec::survival(bad)).unwrap_err();
        assert!(err.to_string().contains("copula.inner.correlation"), "{err}");
        assert!(err.to_string().contains("positive semidefinite"), "{err}");

        let err = Copula::new(CopulaSpec::convex(
            0.5,
            CopulaSpec::independence(2),
            CopulaSpec::independence(3),
        ))
        .unwrap_err();
        assert!(err.to_string().contains("copula.second"), "{err}");

        let err = Copula::new(CopulaSpec::convex(
            1.5,
            CopulaSpec::independence(2),
            CopulaSpec::independence(2),
        ))
        .unwrap_err();
        assert!(err.to_string().contains("lambda"), "{err}");

        let overlapping = CopulaSpec::block_product(vec![
            (vec![0, 1], CopulaSpec::independence(2)),
            (vec![1], CopulaSpec::independence(1)),
        ]);
        assert!(Copula::new(overlapping).is_err());

        let wrong_size = CopulaSpec::block_product(vec![(vec![0, 1], CopulaSpec::independence(3))]);
        let err = Copula::new(wrong_size).unwrap_err();
        assert!(err.to_string().contains("blocks[0].copula"), "{err}");

        assert!(Copula::new(CopulaSpec::homogeneous_gauss(-0.2, 3)).is_err());
        assert!(Copula::new(CopulaSpec::gauss(vec![vec![1.0, 0.5], vec![0.4, 1.0]])).is_err());
    }

    #[test]
    fn comonotone_rows_are_constant() {
        let s = copula(CopulaSpec::comonotone(3)).sample(500, 11).unwrap();
        for row in s.rows() {
            assert!(row[0] == row[1] && row[1] == row[2]);
        }
    }

    #[test]
    fn countermonotone_rows_sum_to_one() {
        let s = copula(CopulaSpec::countermonotone()).sample(500, 3).unwrap();
        for row in s.rows() {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn homogeneous_gauss_rho_one_is_comonotone() {
        let s = copula(CopulaSpec::homogeneous_gauss(1.0, 2)).sample(1000, 5).unwrap();
        for row in s.rows() {
            assert!((row[0] - row[1]).abs() <= 1e-12);
        }
        // singular general matrix takes the pivoted path
        let s = copula(CopulaSpec::gauss(vec![vec![1.0, 1.0], vec![1.0, 1.0]]))
            .sample(1000, 5)
            .unwrap();
        for row in s.rows() {
            assert!((row[0] - row[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn independence_columns_uncorrelated() {
        let s = copula(CopulaSpec::independence(2)).sample(100_000, 2024).unwrap();
        let (a, b) = (s.column(0), s.column(1));
        let r = pearson(&a, &b);
        assert!(r.abs() < 0.02, "r = {r}");
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = copula(CopulaSpec::convex(
            0.3,
            CopulaSpec::homogeneous_gauss(0.5, 4),
            CopulaSpec::survival(CopulaSpec::comonotone(4)),
        ));
        assert_eq!(c.sample(257, 99).unwrap(), c.sample(257, 99).unwrap());
        assert_ne!(c.sample(257, 99).unwrap(), c.sample(257, 100).unwrap());
    }

    #[test]
    fn zero_rows_rejected() {
        assert!(copula(CopulaSpec::independence(2)).sample(0, 1).is_err());
    }

    #[test]
    fn high_dimensional_gauss_cdf_refuses() {
        let c = copula(CopulaSpec::homogeneous_gauss(0.5, 3));
        let err = c.cdf(&[0.5, 0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::UseMonteCarlo(_)));
        // unit coordinates reduce to a bivariate margin
        let v = c.cdf(&[0.5, 1.0, 0.5]).unwrap();
        assert!((v - (0.25 + 0.5f64.asin() / (2.0 * std::f64::consts::PI))).abs() < 1e-14);
    }

    #[test]
    fn survival_of_bivariate_by_formula() {
        let c = copula(CopulaSpec::survival(CopulaSpec::homogeneous_gauss(0.4, 2)));
        let inner = copula(CopulaSpec::homogeneous_gauss(0.4, 2));
        let (u1, u2) = (0.3, 0.8);
        let by_formula = c.survival_cdf_inclusion_exclusion(&[u1, u2], 12).unwrap();
        let direct = u1 + u2 - 1.0 + c.cdf(&[1.0 - u1, 1.0 - u2]).unwrap();
        assert!((by_formula - direct).abs() < 1e-14);
        assert!((c.cdf(&[u1, u2]).unwrap() - inner.cdf(&[u1, u2]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn comonotone_survival_is_min() {
        let c = copula(CopulaSpec::comonotone(5));
        let p = 0.37;
        assert_eq!(c.survival_cdf(&[p; 5]).unwrap(), p);
        let ie = c.survival_cdf_inclusion_exclusion(&[p; 5], 12).unwrap();
        assert!((ie - p).abs() < 1e-14);
    }

    #[test]
    fn independence_survival_eleven_dims() {
        let c = copula(CopulaSpec::independence(11));
        let v = c.survival_cdf(&[1.0 / 3.0; 11]).unwrap();
        assert!((v - 3f64.powi(-11)).abs() < 1e-18);
        assert!((v - 5.645e-6).abs() < 1e-9);
        let ie = c.survival_cdf_inclusion_exclusion(&[1.0 / 3.0; 11], 12).unwrap();
        assert!((ie - v).abs() < 1e-12);
        assert!(matches!(
            c.survival_cdf_inclusion_exclusion(&[0.5; 11], 10),
            Err(Error::UseMonteCarlo(_))
        ));
    }

    #[test]
    fn radial_symmetry_certificates() {
        assert!(copula(CopulaSpec::homogeneous_gauss(0.3, 4)).is_radially_symmetric());
        assert!(copula(CopulaSpec::survival(CopulaSpec::gauss(vec![
            vec![1.0, -0.3],
            vec![-0.3, 1.0]
        ])))
        .is_radially_symmetric());
        assert!(copula(CopulaSpec::convex(
            0.4,
            CopulaSpec::comonotone(3),
            CopulaSpec::independence(3)
        ))
        .is_radially_symmetric());
    }

    #[test]
    fn marginals() {
        let spec = CopulaSpec::block_product(vec![
            (vec![2, 0], CopulaSpec::countermonotone()),
            (vec![1, 3], CopulaSpec::homogeneous_gauss(0.5, 2)),
        ]);
        let m = spec.marginal(&[0, 2]).unwrap();
        let c = copula(m);
        // W(u, v) for the countermonotone pair in swapped order
        assert!((c.cdf(&[0.7, 0.6]).unwrap() - 0.3).abs() < 1e-15);
        let m = copula(spec.marginal(&[3, 0]).unwrap());
        assert!((m.cdf(&[0.5, 0.4]).unwrap() - 0.2).abs() < 1e-15);
        assert!(spec.marginal(&[0, 0]).is_err());
        assert!(spec.marginal(&[4]).is_err());
    }

    #[test]
    fn mc_cdf_rejects_small_samples() {
        let c = copula(CopulaSpec::independence(3));
        assert!(c.mc_cdf(&[0.5; 3], 999, 1).is_err());
        let est = c.mc_cdf(&[0.5; 3], 100_000, 1).unwrap();
        assert!((est.estimate - 0.125).abs() <= 4.0 * est.half_width_95);
    }

    #[test]
    fn point_validation() {
        let c = copula(CopulaSpec::independence(2));
        assert!(c.cdf(&[0.5]).is_err());
        assert!(c.cdf(&[0.5, 1.2]).is_err());
        assert_eq!(c.cdf(&[0.0, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn spec_serialises_to_toml() {
        let spec = CopulaSpec::convex(
            0.25,
            CopulaSpec::block_product(vec![
                (vec![0], CopulaSpec::independence(1)),
                (vec![1, 2], CopulaSpec::countermonotone()),
            ]),
            CopulaSpec::survival(CopulaSpec::gauss(vec![
                vec![1.0, 0.1, 0.2],
                vec![0.1, 1.0, 0.3],
                vec![0.2, 0.3, 1.0],
            ])),
        );
        #[derive(Serialize, Deserialize)]
        struct Wrap {
            copula: CopulaSpec,
        }
        let text = toml::to_string(&Wrap { copula: spec.clone() }).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back.copula, spec);
    }
}
