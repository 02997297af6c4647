//! Finite-dimensional tracial models.
//!
//! A model is a direct sum of full matrix blocks `M_{d_1} ⊕ … ⊕ M_{d_k}`, a
//! trace `τ(X) = Σ_k λ_k · tr(X_k)/d_k`, and one projection-valued measure per
//! question. Correlations are synthesized as `p(i,j|x,y) = τ(E_{x,i} E_{y,j})`.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrsets::{CorrelationMatrix, CorrelationTensor};
use crate::pairs::{pair_count, pairs};
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Default cap on `Σ d_k`.
pub const DEFAULT_MAX_TOTAL_DIM: usize = 32;

/// Block sizes of `M_{d_1} ⊕ … ⊕ M_{d_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAlgebra {
    block_dims: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(block_dims, DEFAULT_MAX_TOTAL_DIM)
    }

    pub fn with_cap(block_dims: Vec<usize>, max_total_dim: usize) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::Malformed(
                "block algebra needs at least one block".into(),
            ));
        }
        if block_dims.contains(&0) {
            return Err(Error::Malformed("block dimensions must be positive".into()));
        }
        let total: usize = block_dims.iter().sum();
        if total > max_total_dim {
            return Err(Error::Malformed(format!(
                "total block dimension {total} exceeds cap {max_total_dim}"
            )));
        }
        Ok(Self { block_dims })
    }

    /// `k` one-dimensional blocks: a commutative algebra.
    pub fn commutative(k: usize) -> Result<Self> {
        Self::with_cap(vec![1; k], k.max(1))
    }

    pub fn dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn block_count(&self) -> usize {
        self.block_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }
}

/// Block weights `λ_k ≥ 0` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialState {
    weights: Vec<f64>,
}

impl TracialState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Malformed("trace needs at least one weight".into()));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Malformed(format!(
                "trace weight {k} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > crate::DEFAULT_TOL {
            return Err(Error::Malformed(format!(
                "trace weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Faithful iff every block carries positive weight.
    pub fn is_faithful(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    pub fn trace(&self, x: &BlockOperator) -> Complex64 {
        assert_eq!(x.blocks.len(), self.weights.len(), "block count mismatch");
        x.blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| b.trace() * (w / b.nrows() as f64))
            .sum()
    }

    /// `τ(XY)` without forming the product.
    pub fn trace_product(&self, x: &BlockOperator, y: &BlockOperator) -> Complex64 {
        assert_eq!(x.blocks.len(), self.weights.len(), "block count mismatch");
        assert_eq!(y.blocks.len(), self.weights.len(), "block count mismatch");
        let mut total = Complex64::new(0.0, 0.0);
        for ((bx, by), &w) in x.blocks.iter().zip(&y.blocks).zip(&self.weights) {
            let d = bx.nrows();
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..d {
                for c in 0..d {
                    acc += bx[(r, c)] * by[(c, r)];
                }
            }
            total += acc * (w / d as f64);
        }
        total
    }
}

/// An element of a block algebra: one square complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<CMatrix>,
}

impl BlockOperator {
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Malformed("operator needs at least one block".into()));
        }
        if let Some(k) = blocks.iter().position(|b| !b.is_square() || b.nrows() == 0) {
            return Err(Error::Malformed(format!(
                "block {k} is not a non-empty square matrix"
            )));
        }
        Ok(Self { blocks })
    }

    /// Single-block operator.
    pub fn single(block: CMatrix) -> Self {
        assert!(block.is_square(), "block must be square");
        Self {
            blocks: vec![block],
        }
    }

    /// Operator with real entries, given block by block as rows.
    pub fn from_real_blocks(blocks: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mats = blocks
            .iter()
            .map(|rows| {
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Malformed("block rows must be square".into()));
                }
                Ok(CMatrix::from_fn(d, d, |r, c| {
                    Complex64::new(rows[r][c], 0.0)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(mats)
    }

    pub fn identity(algebra: &BlockAlgebra) -> Self {
        Self {
            blocks: algebra
                .dims()
                .iter()
                .map(|&d| CMatrix::identity(d, d))
                .collect(),
        }
    }

    pub fn zero(algebra: &BlockAlgebra) -> Self {
        Self {
            blocks: algebra
                .dims()
                .iter()
                .map(|&d| CMatrix::zeros(d, d))
                .collect(),
        }
    }

    /// Diagonal operator on a commutative algebra with the given scalar per block.
    pub fn scalars(values: &[f64]) -> Self {
        Self {
            blocks: values
                .iter()
                .map(|&v| CMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        assert_eq!(self.dims(), other.dims(), "block structure mismatch");
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| b * Complex64::new(s, 0.0))
                .collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    /// Largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                if b.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                    0.0
                } else {
                    b.clone().singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    pub fn idempotent_residual(&self) -> f64 {
        (&(self * self) - self).op_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// `‖X² − X‖ ≤ tol` and `‖X − X*‖ ≤ tol` blockwise.
    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.idempotent_residual() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims(), "block structure mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

impl Add for &BlockOperator {
    type Output = BlockOperator;

    fn add(self, rhs: Self) -> BlockOperator {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;

    fn sub(self, rhs: Self) -> BlockOperator {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;

    fn mul(self, rhs: Self) -> BlockOperator {
        self.zip_with(rhs, |a, b| a * b)
    }
}

/// Block algebra, trace, and one projection-valued measure per question.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialModel {
    algebra: BlockAlgebra,
    trace: TracialState,
    pvms: Vec<Vec<BlockOperator>>,
}

impl TracialModel {
    /// Checks shapes only; PVM relations are checked by [`TracialModel::check_pvms`].
    pub fn new(
        algebra: BlockAlgebra,
        trace: TracialState,
        pvms: Vec<Vec<BlockOperator>>,
    ) -> Result<Self> {
        if trace.weights.len() != algebra.block_count() {
            return Err(Error::Malformed(format!(
                "{} trace weights for {} blocks",
                trace.weights.len(),
                algebra.block_count()
            )));
        }
        if pvms.is_empty() {
            return Err(Error::Malformed("model needs at least one question".into()));
        }
        let m = pvms[0].len();
        if m == 0 {
            return Err(Error::Malformed("a PVM needs at least one outcome".into()));
        }
        for (x, pvm) in pvms.iter().enumerate() {
            if pvm.len() != m {
                return Err(Error::Malformed(format!(
                    "question {x} has {} outcomes, expected {m}",
                    pvm.len()
                )));
            }
            if pvm.iter().any(|e| e.dims() != algebra.dims()) {
                return Err(Error::Malformed(format!(
                    "question {x} has an operator with the wrong block structure"
                )));
            }
        }
        Ok(Self {
            algebra,
            trace,
            pvms,
        })
    }

    /// Two-outcome model with PVMs `{P_x, I − P_x}`.
    pub fn two_outcome(
        algebra: BlockAlgebra,
        trace: TracialState,
        projections: Vec<BlockOperator>,
    ) -> Result<Self> {
        let id = BlockOperator::identity(&algebra);
        let pvms = projections
            .into_iter()
            .map(|p| {
                let q = &id - &p;
                vec![p, q]
            })
            .collect();
        Self::new(algebra, trace, pvms)
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn trace(&self) -> &TracialState {
        &self.trace
    }

    pub fn pvms(&self) -> &[Vec<BlockOperator>] {
        &self.pvms
    }

    pub fn questions(&self) -> usize {
        self.pvms.len()
    }

    pub fn outcomes(&self) -> usize {
        self.pvms[0].len()
    }

    /// The outcome-`i` projection of every question.
    pub fn outcome_projections(&self, i: usize) -> Vec<BlockOperator> {
        self.pvms.iter().map(|pvm| pvm[i].clone()).collect()
    }

    /// Checks that each PVM consists of projections summing to the identity
    /// with vanishing cross terms, reporting the first offending block.
    pub fn check_pvms(&self, tol: f64) -> Result<()> {
        let dims = self.algebra.dims();
        for (x, pvm) in self.pvms.iter().enumerate() {
            for (k, &d) in dims.iter().enumerate() {
                let mut sum = CMatrix::zeros(d, d);
                for (i, e) in pvm.iter().enumerate() {
                    let b = &e.blocks[k];
                    let herm = block_norm(&(b - b.adjoint()));
                    if herm > tol {
                        return Err(Error::ModelInvalid {
                            what: "non-hermitian PVM element",
                            question: x,
                            block: k,
                            residual: herm,
                        });
                    }
                    let idem = block_norm(&(b * b - b));
                    if idem > tol {
                        return Err(Error::ModelInvalid {
                            what: "non-idempotent PVM element",
                            question: x,
                            block: k,
                            residual: idem,
                        });
                    }
                    for f in &pvm[i + 1..] {
                        let cross = block_norm(&(b * &f.blocks[k]));
                        if cross > tol {
                            return Err(Error::ModelInvalid {
                                what: "non-orthogonal PVM elements",
                                question: x,
                                block: k,
                                residual: cross,
                            });
                        }
                    }
                    sum += b;
                }
                let gap = block_norm(&(sum - CMatrix::identity(d, d)));
                if gap > tol {
                    return Err(Error::ModelInvalid {
                        what: "PVM does not sum to the identity",
                        question: x,
                        block: k,
                        residual: gap,
                    });
                }
            }
        }
        Ok(())
    }
}

fn block_norm(b: &CMatrix) -> f64 {
    if b.iter().all(|z| z.norm() == 0.0) {
        0.0
    } else {
        b.clone().singular_values().max()
    }
}

/// On-disk model layout. `pvms[x][i][k]` is the block-`k` matrix of `E_{x,i}`,
/// given as rows of `[re, im]` pairs.
/// Rows of `[re, im]` entries.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
    pub pvms: Vec<Vec<Vec<MatrixRows>>>,
}

impl TryFrom<ModelFile> for TracialModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        let algebra = BlockAlgebra::new(file.blocks)?;
        let trace = TracialState::new(file.weights)?;
        let pvms = file
            .pvms
            .into_iter()
            .map(|pvm| {
                pvm.into_iter()
                    .map(|op| {
                        let blocks = op
                            .into_iter()
                            .map(|rows| {
                                let d = rows.len();
                                if rows.iter().any(|r| r.len() != d) {
                                    return Err(Error::Malformed(
                                        "model matrix is not square".into(),
                                    ));
                                }
                                Ok(CMatrix::from_fn(d, d, |r, c| {
                                    Complex64::new(rows[r][c][0], rows[r][c][1])
                                }))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        BlockOperator::from_blocks(blocks)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        TracialModel::new(algebra, trace, pvms)
    }
}

impl From<&TracialModel> for ModelFile {
    fn from(model: &TracialModel) -> Self {
        ModelFile {
            blocks: model.algebra.dims().to_vec(),
            weights: model.trace.weights.clone(),
            pvms: model
                .pvms
                .iter()
                .map(|pvm| {
                    pvm.iter()
                        .map(|op| {
                            op.blocks
                                .iter()
                                .map(|b| {
                                    (0..b.nrows())
                                        .map(|r| {
                                            (0..b.ncols())
                                                .map(|c| [b[(r, c)].re, b[(r, c)].im])
                                                .collect()
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// `p(i,j|x,y) = τ(E_{x,i} E_{y,j})`.
pub fn synthesize(model: &TracialModel, tol: f64) -> Result<CorrelationTensor> {
    model.check_pvms(tol)?;
    let (n, m) = (model.questions(), model.outcomes());
    Ok(CorrelationTensor::from_fn(n, m, |x, y, i, j| {
        model
            .trace
            .trace_product(&model.pvms[x][i], &model.pvms[y][j])
            .re
    }))
}

/// Matrix `w_{x,y} = τ(P_x P_y)` of a family of projections.
pub fn gram_matrix(projections: &[BlockOperator], trace: &TracialState) -> CorrelationMatrix {
    let n = projections.len();
    let mut w = vec![0.0; n * n];
    for x in 0..n {
        for y in x..n {
            let v = trace.trace_product(&projections[x], &projections[y]).re;
            w[x * n + y] = v;
            w[y * n + x] = v;
        }
    }
    CorrelationMatrix::new(n, w).expect("gram matrix has n² finite entries")
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// First `k` columns of a random unitary: modified Gram–Schmidt applied to a
/// complex Gaussian `d×k` matrix.
pub fn random_isometry<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> CMatrix {
    assert!(k <= d, "isometry needs k ≤ d");
    let mut q = CMatrix::zeros(d, k);
    let mut col = 0;
    while col < k {
        let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        for prev in 0..col {
            let proj: Complex64 = (0..d).map(|r| q[(r, prev)].conj() * v[r]).sum();
            for (r, vr) in v.iter_mut().enumerate() {
                *vr -= proj * q[(r, prev)];
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // a Gaussian draw lands in the span of earlier columns with probability zero
        if norm < 1e-10 {
            continue;
        }
        for (r, vr) in v.iter().enumerate() {
            q[(r, col)] = vr / norm;
        }
        col += 1;
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    random_isometry(d, d, rng)
}

/// `U diag(1^rank, 0^{d−rank}) U*` for a random unitary `U`.
pub fn random_projection_with<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> Result<CMatrix> {
    if rank > d {
        return Err(Error::Precondition(format!(
            "rank {rank} exceeds dimension {d}"
        )));
    }
    let v = random_isometry(d, rank, rng);
    Ok(&v * v.adjoint())
}

pub fn random_projection(d: usize, rank: usize, seed: u64) -> Result<BlockOperator> {
    if d == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(BlockOperator::single(random_projection_with(
        d, rank, &mut rng,
    )?))
}

/// `m` projections summing to the identity: the standard basis is dealt
/// round-robin into the parts in random order, then conjugated by a random
/// unitary. Parts are as balanced as possible, so `d < m` leaves exactly
/// `m − d` of them empty.
pub fn random_pvm(d: usize, m: usize, seed: u64) -> Result<Vec<BlockOperator>> {
    if d == 0 || m == 0 {
        return Err(Error::Precondition(
            "dimension and outcome count must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<usize> = (0..d).collect();
    basis.shuffle(&mut rng);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let u = random_unitary(d, &mut rng);
    let mut parts = vec![CMatrix::zeros(d, d); m];
    for (k, &e) in basis.iter().enumerate() {
        let col = u.column(e);
        parts[order[k % m]] += col * col.adjoint();
    }
    Ok(parts.into_iter().map(BlockOperator::single).collect())
}

/// Measured residuals for "orthogonal projections under a faithful trace form a PVM".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityVerdict {
    /// `max_{i≠j} |τ(P_i P_j)|`.
    pub max_trace_pair: f64,
    /// `max_{i≠j} ‖P_i P_j‖`.
    pub max_product_norm: f64,
    /// `|Σ_{i,j} τ(P_i P_j) − 1|`.
    pub pair_sum_gap: f64,
    /// `‖Σ_i P_i − I‖`.
    pub sum_residual: f64,
    pub orthogonality_hypothesis: bool,
    pub normalization_hypothesis: bool,
}

impl OrthogonalityVerdict {
    /// Whether the conclusions hold to within `bound` wherever the
    /// corresponding hypotheses are met.
    pub fn conclusions_within(&self, bound: f64) -> bool {
        (!self.orthogonality_hypothesis || self.max_product_norm <= bound)
            && (!self.normalization_hypothesis || self.sum_residual <= bound)
    }
}

/// Numerical form of: under a faithful trace, `τ(P_i P_j) = 0` forces
/// `P_i P_j = 0`, and a unit pair sum then forces `Σ P_i = I`.
pub fn orthogonality_to_pvm(
    projections: &[BlockOperator],
    trace: &TracialState,
    tol: f64,
) -> Result<OrthogonalityVerdict> {
    if !trace.is_faithful() {
        return Err(Error::Precondition("trace is not faithful".into()));
    }
    if projections.is_empty() {
        return Err(Error::Malformed("need at least one projection".into()));
    }
    let mut max_trace_pair: f64 = 0.0;
    let mut max_product_norm: f64 = 0.0;
    let mut pair_sum = 0.0;
    for (i, p) in projections.iter().enumerate() {
        for (j, q) in projections.iter().enumerate() {
            let t = trace.trace_product(p, q);
            pair_sum += t.re;
            if i != j {
                max_trace_pair = max_trace_pair.max(t.norm());
                max_product_norm = max_product_norm.max((p * q).op_norm());
            }
        }
    }
    let mut sum = BlockOperator {
        blocks: projections[0]
            .blocks
            .iter()
            .map(|b| CMatrix::zeros(b.nrows(), b.nrows()))
            .collect(),
    };
    for p in projections {
        sum = &sum + p;
    }
    let id = BlockOperator {
        blocks: sum
            .blocks
            .iter()
            .map(|b| CMatrix::identity(b.nrows(), b.nrows()))
            .collect(),
    };
    let pair_sum_gap = (pair_sum - 1.0).abs();
    let orthogonality_hypothesis = max_trace_pair <= tol;
    Ok(OrthogonalityVerdict {
        max_trace_pair,
        max_product_norm,
        pair_sum_gap,
        sum_residual: (&sum - &id).op_norm(),
        orthogonality_hypothesis,
        normalization_hypothesis: orthogonality_hypothesis && pair_sum_gap <= tol,
    })
}

/// `max_i ‖[P_i, Σ_{j≠i} x_{ij} P_j]‖` for one projection per question and
/// pair weights `x` in canonical pair order. Zero exactly when the family
/// satisfies the commutation relations of direction `x`.
///
/// Panics if `x` does not have one entry per pair.
pub fn commutator_defect(projections: &[BlockOperator], x: &[f64]) -> f64 {
    let n = projections.len();
    assert_eq!(x.len(), pair_count(n), "need one weight per pair");
    if n == 0 {
        return 0.0;
    }
    let mut weighted: Vec<BlockOperator> = projections.iter().map(|p| p.scale(0.0)).collect();
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        weighted[i] = &weighted[i] + &projections[j].scale(x[k]);
        weighted[j] = &weighted[j] + &projections[i].scale(x[k]);
    }
    projections
        .iter()
        .zip(&weighted)
        .map(|(p, s)| p.commutator(s).op_norm())
        .fold(0.0, f64::max)
}

/// Hermitian generator of an improving rotation and the derivative it achieves.
#[derive(Debug, Clone)]
pub struct Improvement {
    pub h: BlockOperator,
    pub derivative: f64,
}

/// For hermitian `A, B`, returns `H = i[B,A]` together with
/// `f'(0) = τ([B,A]*[B,A])` where `f(t) = τ(A e^{iHt} B e^{-iHt})`.
pub fn improving_direction(
    a: &BlockOperator,
    b: &BlockOperator,
    trace: &TracialState,
) -> Result<Improvement> {
    let tol = crate::DEFAULT_TOL;
    if !a.is_hermitian(tol) || !b.is_hermitian(tol) {
        return Err(Error::Precondition(
            "improving direction needs hermitian inputs".into(),
        ));
    }
    let k = b.commutator(a);
    let h = k.scale_complex(Complex64::new(0.0, 1.0));
    let derivative = trace.trace_product(&k.adjoint(), &k).re;
    Ok(Improvement { h, derivative })
}

/// `e^{iHt}` for hermitian `H`, via the eigendecomposition of each block.
pub fn unitary_flow(h: &BlockOperator, t: f64) -> BlockOperator {
    BlockOperator {
        blocks: h
            .blocks
            .iter()
            .map(|b| {
                let herm = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
                let eig = herm.symmetric_eigen();
                let phases = CMatrix::from_diagonal(
                    &eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l * t)),
                );
                &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
            })
            .collect(),
    }
}

/// `f(t) = τ(A e^{iHt} B e^{-iHt})`.
pub fn rotated_pairing(
    a: &BlockOperator,
    b: &BlockOperator,
    h: &BlockOperator,
    trace: &TracialState,
    t: f64,
) -> f64 {
    let u = unitary_flow(h, t);
    let rotated = &(&u * b) * &u.adjoint();
    trace.trace_product(a, &rotated).re
}

/// A point of the quantum set: diagonal `τ(P_i)` and upper triangle `τ(P_iP_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DqSample {
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DqSample {
    pub fn from_projections(projections: &[BlockOperator], trace: &TracialState) -> Self {
        let w = gram_matrix(projections, trace);
        Self {
            diag: w.diagonal(),
            upper: w.upper(),
        }
    }

    pub fn from_model(model: &TracialModel) -> Self {
        Self::from_projections(&model.outcome_projections(0), model.trace())
    }
}

/// Largest block dimension accepted by [`sample_dq`] (three blocks at most).
pub const MAX_SAMPLE_BLOCK_DIM: usize = DEFAULT_MAX_TOTAL_DIM / 3;

fn sample_one(n: usize, d: usize, seed: u64, index: u64) -> DqSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let blocks = rng.random_range(1..=3usize);
    let dims: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=d)).collect();
    let raw: Vec<f64> = (0..blocks).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let projections: Vec<BlockOperator> = (0..n)
        .map(|_| BlockOperator {
            blocks: dims
                .iter()
                .map(|&dk| {
                    let rank = rng.random_range(0..=dk);
                    random_projection_with(dk, rank, &mut rng).expect("rank ≤ dimension")
                })
                .collect(),
        })
        .collect();
    DqSample::from_projections(&projections, &TracialState { weights })
}

/// Brute-force samples of the quantum set: each sample comes from a random
/// model with one to three blocks of dimension at most `d`, random block
/// weights, and one random projection of random rank per question and block.
///
/// Sample `k` draws from its own ChaCha stream `k` under `seed`, so the
/// result does not depend on how the work is split across threads.
pub fn sample_dq(n: usize, d: usize, count: usize, seed: u64) -> Result<Vec<DqSample>> {
    if n == 0 {
        return Err(Error::Precondition("need at least one question".into()));
    }
    if d == 0 || d > MAX_SAMPLE_BLOCK_DIM {
        return Err(Error::Precondition(format!(
            "block dimension must lie in 1..={MAX_SAMPLE_BLOCK_DIM}, got {d}"
        )));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|k| sample_one(n, d, seed, k))
        .collect())
}

/// CSV header `y0..y{n-1},w01,w02,…`.
pub fn sample_header(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| format!("y{i}"))
        .chain(pairs(n).into_iter().map(|(i, j)| format!("w{i}{j}")))
        .collect()
}

/// Seventeen significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_samples_csv<W: Write>(out: W, n: usize, samples: &[DqSample]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    wtr.write_record(sample_header(n))?;
    for s in samples {
        wtr.write_record(s.diag.iter().chain(&s.upper).map(|&v| format_float(v)))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a sample CSV, inferring `n` from the header.
pub fn read_samples_csv<R: Read>(input: R) -> Result<(usize, Vec<DqSample>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let n = header.iter().filter(|h| h.starts_with('y')).count();
    let expected = sample_header(n);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Malformed(format!(
            "sample header {:?} does not match {:?}",
            header.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    let mut samples = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Malformed(format!("row {row}: bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(DqSample {
            diag: values[..n].to_vec(),
            upper: values[n..].to_vec(),
        });
    }
    Ok((n, samples))
}
