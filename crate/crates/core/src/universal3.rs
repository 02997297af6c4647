//! The universal C*-algebra of three projections `A, B, C` satisfying
//! `[A, aB + bC] = [B, aA + C] = 0` for non-zero real `a, b`.
//!
//! Its irreducible representations are the eight one-dimensional ones
//! (`A, B, C ↦ 0 or 1`) and, when the parameter `t` below lies in `(0, 1)`,
//! a single two-dimensional one:
//!
//! ```text
//! A = [[1, 0], [0, 0]]
//! B = [[t, s], [s, 1 − t]]                     s = √(t(1 − t))
//! C = [[z, −(a/b)s], [−(a/b)s, 1 − z]]
//! t = (b² + 2a²b − a²b² − a²) / (4a²b)
//! z = ½ ± ½ √(1 − (4a²/b²) t(1 − t))
//! ```
//!
//! Exactly one sign of `z` satisfies the second relation unless the square
//! root vanishes. The sign is picked here by evaluating both candidates.
//!
//! Every trace on the algebra is a convex combination of the nine extreme
//! traces ("atoms"): point evaluations on the scalar blocks and the
//! normalized trace `tr/2` on the `M_2` block.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::corrsets::CorrelationMatrix;
use crate::tracial::{BlockAlgebra, BlockOperator, CMatrix, TracialModel, TracialState};
use crate::{Error, Result};

/// Residual bound for the projection and commutation identities of the `M_2` block.
pub const RELATION_TOL: f64 = 1e-12;

/// Pair weights `(a, b, c) = (x_{0,1}, x_{0,2}, x_{1,2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction3 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Direction3 {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            [a, b, c] => Ok(Self::new(*a, *b, *c)),
            _ => Err(Error::Malformed(format!(
                "a three-question direction has 3 pair weights, got {}",
                x.len()
            ))),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == 0.0 || self.b == 0.0 || self.c == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizedDirection {
    /// `(a/c, b/c)`; the relations are invariant under non-zero rescaling.
    Scaled { a: f64, b: f64 },
    /// At least one pair weight vanishes.
    Degenerate {
        zero_a: bool,
        zero_b: bool,
        zero_c: bool,
    },
}

pub fn normalize_direction(x: &Direction3) -> NormalizedDirection {
    if x.is_degenerate() {
        NormalizedDirection::Degenerate {
            zero_a: x.a == 0.0,
            zero_b: x.b == 0.0,
            zero_c: x.c == 0.0,
        }
    } else {
        NormalizedDirection::Scaled {
            a: x.a / x.c,
            b: x.b / x.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    /// Point evaluation with `(A, B, C) ↦ (α, β, γ)`.
    Scalar([u8; 3]),
    M2,
}

/// An extreme trace, recorded by the diagonal `(τA, τB, τC)` and the
/// off-diagonal pairings `(τ(AB), τ(AC), τ(BC))` it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceAtom {
    pub diag: [f64; 3],
    pub offdiag: [f64; 3],
    pub kind: AtomKind,
}

impl TraceAtom {
    pub fn scalar(alpha: [u8; 3]) -> Self {
        let [a, b, c] = alpha.map(f64::from);
        Self {
            diag: [a, b, c],
            offdiag: [a * b, a * c, b * c],
            kind: AtomKind::Scalar(alpha),
        }
    }

    /// The eight scalar atoms in block order: `(1,1,1), (1,1,0), …, (0,0,0)`.
    pub fn scalar_atoms() -> Vec<TraceAtom> {
        (0..8u8)
            .map(|k| TraceAtom::scalar([1 - ((k >> 2) & 1), 1 - ((k >> 1) & 1), 1 - (k & 1)]))
            .collect()
    }
}

/// The two-dimensional irreducible representation for parameters `(a, b, t, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct M2Block {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub z: f64,
    pub proj_a: CMatrix,
    pub proj_b: CMatrix,
    pub proj_c: CMatrix,
}

fn real2(m: [[f64; 2]; 2]) -> CMatrix {
    DMatrix::from_fn(2, 2, |r, c| Complex64::new(m[r][c], 0.0))
}

fn norm2(m: &CMatrix) -> f64 {
    if m.iter().all(|z| z.norm() == 0.0) {
        0.0
    } else {
        m.clone().singular_values().max()
    }
}

fn comm(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

fn lin(terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = CMatrix::zeros(2, 2);
    for (s, m) in terms {
        out += *m * Complex64::new(*s, 0.0);
    }
    out
}

/// Residuals of the defining identities on an `M_2` block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    /// `‖P² − P‖` for `A, B, C`.
    pub idempotent: [f64; 3],
    /// `‖P − P*‖` for `A, B, C`.
    pub hermitian: [f64; 3],
    /// `‖[A, aB + bC]‖`.
    pub first_relation: f64,
    /// `‖[B, aA + C]‖`.
    pub second_relation: f64,
    /// `‖[C, bA + B]‖`, implied by the other two.
    pub third_relation: f64,
    /// `‖[H, P]‖` for `P = A, B, C`, with `H = (aB + bC)² − (a + b)(aB + bC)`.
    pub invariant_commutators: [f64; 3],
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.idempotent
            .iter()
            .chain(&self.hermitian)
            .chain(&self.invariant_commutators)
            .chain([
                &self.first_relation,
                &self.second_relation,
                &self.third_relation,
            ])
            .fold(0.0, |acc, v| acc.max(*v))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

impl M2Block {
    pub fn new(a: f64, b: f64, t: f64, z: f64) -> Self {
        let s = (t * (1.0 - t)).max(0.0).sqrt();
        let off_c = -(a / b) * s;
        Self {
            a,
            b,
            t,
            z,
            proj_a: real2([[1.0, 0.0], [0.0, 0.0]]),
            proj_b: real2([[t, s], [s, 1.0 - t]]),
            proj_c: real2([[z, off_c], [off_c, 1.0 - z]]),
        }
    }

    /// `‖[B, aA + C]‖`, the relation that decides the sign of `z`.
    pub fn second_relation_residual(&self) -> f64 {
        let rhs = lin(&[(self.a, &self.proj_a), (1.0, &self.proj_c)]);
        norm2(&comm(&self.proj_b, &rhs))
    }

    pub fn residuals(&self) -> RelationReport {
        let (a, b) = (self.a, self.b);
        let ps = [&self.proj_a, &self.proj_b, &self.proj_c];
        let idempotent = ps.map(|p| norm2(&(p * p - p)));
        let hermitian = ps.map(|p| norm2(&(p - p.adjoint())));
        let first = lin(&[(a, &self.proj_b), (b, &self.proj_c)]);
        let second = lin(&[(a, &self.proj_a), (1.0, &self.proj_c)]);
        let third = lin(&[(b, &self.proj_a), (1.0, &self.proj_b)]);
        let h = &first * &first - &first * Complex64::new(a + b, 0.0);
        RelationReport {
            idempotent,
            hermitian,
            first_relation: norm2(&comm(&self.proj_a, &first)),
            second_relation: norm2(&comm(&self.proj_b, &second)),
            third_relation: norm2(&comm(&self.proj_c, &third)),
            invariant_commutators: ps.map(|p| norm2(&comm(&h, p))),
        }
    }

    /// Closed-form pairings under `tr/2`.
    pub fn atom(&self) -> TraceAtom {
        let (t, z) = (self.t, self.z);
        let bc = t * z + (1.0 - t) * (1.0 - z) - 2.0 * (self.a / self.b) * t * (1.0 - t);
        TraceAtom {
            diag: [0.5, 0.5, 0.5],
            offdiag: [t / 2.0, z / 2.0, bc / 2.0],
            kind: AtomKind::M2,
        }
    }
}

/// How the sign of `z` was decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSelection {
    /// `‖[B, aA + C]‖` at the chosen `z`.
    pub winner_residual: f64,
    /// The same residual at the rejected root.
    pub loser_residual: f64,
    /// Both roots coincide at `z = ½`.
    pub double_root: bool,
    /// `+1` if `z = ½ + ½√…` was chosen, `−1` otherwise.
    pub sign: i8,
}

/// The algebra for a normalized direction `(a, b, 1)` and its trace atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Universal3Rep {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub z: Option<f64>,
    pub has_m2: bool,
    pub atoms: Vec<TraceAtom>,
    pub m2: Option<M2Block>,
    pub branch: Option<BranchSelection>,
}

/// `t = (b² + 2a²b − a²b² − a²) / (4a²b)`.
pub fn t_parameter(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    (b2 + 2.0 * a2 * b - a2 * b2 - a2) / (4.0 * a2 * b)
}

/// `1 − (4a²/b²) t(1 − t)`, the square of `2z − 1`.
pub fn discriminant(a: f64, b: f64, t: f64) -> f64 {
    1.0 - 4.0 * (a * a) / (b * b) * t * (1.0 - t)
}

/// Rounding slack below zero still treated as a vanishing discriminant.
const DISCRIMINANT_SLACK: f64 = 1e-12;

pub fn build_rep(a: f64, b: f64) -> Result<Universal3Rep> {
    if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Precondition(format!(
            "the universal algebra needs finite non-zero a and b (got a={a}, b={b})"
        )));
    }
    let t = t_parameter(a, b);
    let disc = discriminant(a, b, t);
    let mut atoms = TraceAtom::scalar_atoms();
    if !(t > 0.0 && t < 1.0 && disc >= -DISCRIMINANT_SLACK) {
        return Ok(Universal3Rep {
            a,
            b,
            t,
            z: None,
            has_m2: false,
            atoms,
            m2: None,
            branch: None,
        });
    }
    let root = 0.5 * disc.max(0.0).sqrt();
    let plus = M2Block::new(a, b, t, 0.5 + root);
    let minus = M2Block::new(a, b, t, 0.5 - root);
    let (r_plus, r_minus) = (
        plus.second_relation_residual(),
        minus.second_relation_residual(),
    );
    let (block, winner, loser, sign) = if r_plus <= r_minus {
        (plus, r_plus, r_minus, 1)
    } else {
        (minus, r_minus, r_plus, -1)
    };
    if winner > RELATION_TOL {
        return Err(Error::Construction(format!(
            "no root for z satisfies [B, aA + C] = 0 at a={a}, b={b} (best residual {winner:e})"
        )));
    }
    let double_root = loser <= RELATION_TOL;
    if double_root && root > 1e-6 {
        return Err(Error::Construction(format!(
            "both roots for z pass at a={a}, b={b} although they differ by {}",
            2.0 * root
        )));
    }
    let residuals = block.residuals();
    if !residuals.passes(RELATION_TOL) {
        return Err(Error::Construction(format!(
            "M2 block fails its identities at a={a}, b={b}: {residuals:?}"
        )));
    }
    atoms.push(block.atom());
    Ok(Universal3Rep {
        a,
        b,
        t,
        z: Some(block.z),
        has_m2: true,
        atoms,
        m2: Some(block),
        branch: Some(BranchSelection {
            winner_residual: winner,
            loser_residual: loser,
            double_root,
            sign,
        }),
    })
}

/// Residual report for the `M_2` block of a representation.
pub fn verify_rep(rep: &Universal3Rep) -> Result<RelationReport> {
    rep.m2
        .as_ref()
        .map(M2Block::residuals)
        .ok_or_else(|| Error::Precondition("representation has no M2 block".into()))
}

fn check_weights(rep: &Universal3Rep, weights: &[f64]) -> Result<()> {
    if weights.len() != rep.atoms.len() {
        return Err(Error::Malformed(format!(
            "{} weights for {} atoms",
            weights.len(),
            rep.atoms.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Malformed("atom weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > crate::DEFAULT_TOL {
        return Err(Error::Malformed(format!(
            "atom weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// The correlation matrix of the trace `Σ_k λ_k · atom_k`.
pub fn correlation_from_trace(rep: &Universal3Rep, weights: &[f64]) -> Result<CorrelationMatrix> {
    check_weights(rep, weights)?;
    let mut diag = [0.0; 3];
    let mut off = [0.0; 3];
    for (atom, &w) in rep.atoms.iter().zip(weights) {
        for k in 0..3 {
            diag[k] += w * atom.diag[k];
            off[k] += w * atom.offdiag[k];
        }
    }
    CorrelationMatrix::from_parts(&diag, &off)
}

/// A concrete model realizing `Σ_k λ_k · atom_k`: one scalar block per
/// scalar atom plus the `M_2` block, with trace weights `λ`.
pub fn realizing_model(rep: &Universal3Rep, weights: &[f64]) -> Result<TracialModel> {
    check_weights(rep, weights)?;
    let mut dims = vec![1; 8];
    if rep.has_m2 {
        dims.push(2);
    }
    let algebra = BlockAlgebra::new(dims)?;
    let trace = TracialState::new(weights.to_vec())?;
    let projections = (0..3)
        .map(|q| {
            let mut blocks: Vec<CMatrix> = rep.atoms[..8]
                .iter()
                .map(|atom| CMatrix::from_element(1, 1, Complex64::new(atom.diag[q], 0.0)))
                .collect();
            if let Some(m2) = &rep.m2 {
                blocks.push([&m2.proj_a, &m2.proj_b, &m2.proj_c][q].clone());
            }
            BlockOperator::from_blocks(blocks)
        })
        .collect::<Result<Vec<_>>>()?;
    TracialModel::two_outcome(algebra, trace, projections)
}

/// JSON dump layout.
#[derive(Debug, Clone, Serialize)]
pub struct RepDump<'a> {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub z: Option<f64>,
    pub has_m2: bool,
    pub atoms: &'a [TraceAtom],
}

impl Universal3Rep {
    pub fn dump(&self) -> RepDump<'_> {
        RepDump {
            a: self.a,
            b: self.b,
            t: self.t,
            z: self.z,
            has_m2: self.has_m2,
            atoms: &self.atoms,
        }
    }
}

/// The verification grid: `a, b ∈ {±3, ±2, ±1.5, ±1, ±0.75, ±0.5, ±0.25}`.
pub fn verification_grid() -> Vec<(f64, f64)> {
    const MAGNITUDES: [f64; 7] = [3.0, 2.0, 1.5, 1.0, 0.75, 0.5, 0.25];
    let values: Vec<f64> = MAGNITUDES.iter().flat_map(|&v| [v, -v]).collect();
    values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| (a, b)))
        .collect()
}

/// Outcome of checking one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCheck {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub z: Option<f64>,
    pub has_m2: bool,
    /// Largest residual of [`RelationReport`]; `None` without an `M_2` block.
    pub max_residual: Option<f64>,
    pub winner_residual: Option<f64>,
    pub loser_residual: Option<f64>,
    pub double_root: bool,
    /// Construction failure message, if any.
    pub error: Option<String>,
}

impl PointCheck {
    /// All identities hold and exactly one branch passes unless the roots coincide.
    pub fn passes(&self) -> bool {
        self.error.is_none()
            && (!self.has_m2
                || (self.max_residual.is_some_and(|r| r <= RELATION_TOL)
                    && self.loser_residual.is_some_and(|r| r > RELATION_TOL) != self.double_root))
    }
}

pub fn check_point(a: f64, b: f64) -> PointCheck {
    match build_rep(a, b) {
        Ok(rep) => PointCheck {
            a,
            b,
            t: rep.t,
            z: rep.z,
            has_m2: rep.has_m2,
            max_residual: verify_rep(&rep).ok().map(|r| r.max_residual()),
            winner_residual: rep.branch.map(|b| b.winner_residual),
            loser_residual: rep.branch.map(|b| b.loser_residual),
            double_root: rep.branch.is_some_and(|b| b.double_root),
            error: None,
        },
        Err(e) => PointCheck {
            a,
            b,
            t: t_parameter(a, b),
            z: None,
            has_m2: false,
            max_residual: None,
            winner_residual: None,
            loser_residual: None,
            double_root: false,
            error: Some(e.to_string()),
        },
    }
}

/// `count` seeded points `(a, b)` with `|a|, |b| ∈ [0.1, 4]` and random signs
/// that carry an `M_2` block, drawn by rejection.
pub fn random_m2_points(count: usize, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let v: f64 = rng.random_range(0.1..4.0);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let t = t_parameter(a, b);
        if t > 0.0 && t < 1.0 && discriminant(a, b, t) >= 0.0 {
            out.push((a, b));
        }
    }
    out
}

/// Checks every point, in input order.
pub fn check_points(points: &[(f64, f64)]) -> Vec<PointCheck> {
    use rayon::prelude::*;
    points.par_iter().map(|&(a, b)| check_point(a, b)).collect()
}
