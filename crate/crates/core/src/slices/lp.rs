//! Exact linear programs over a finite atom set.
//!
//! Maximizes or minimizes `Σ_k λ_k ⟨x, offdiag_k⟩` over `λ ≥ 0` subject to
//! `Σ λ_k = 1` and `Σ λ_k diag_k = y`, by enumerating every basic feasible
//! solution. With at most sixteen atoms and four equalities the enumeration
//! touches a few thousand supports and is fully deterministic.

use nalgebra::{DMatrix, DVector};

use super::Side;
use crate::{Error, Result};

pub const MAX_ATOMS: usize = 16;

/// Residual allowed when a support's square system reproduces `(1, y)`.
const EQUALITY_TOL: f64 = 1e-9;
/// Smallest weight kept on a support; smaller ones belong to a smaller support.
const WEIGHT_FLOOR: f64 = 1e-12;
/// Objective values closer than this count as a tie.
const TIE_TOL: f64 = 1e-12;

/// An extreme trace seen through its diagonal and upper-triangle pairings.
pub trait AtomData {
    fn diag(&self) -> &[f64];
    fn offdiag(&self) -> &[f64];
}

impl AtomData for crate::universal3::TraceAtom {
    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    /// One weight per atom, zero off the support.
    pub weights: Vec<f64>,
    /// Atom indices of the optimal basic solution, ascending.
    pub support: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// Weights on `support` reproducing `rhs`, if the columns are independent
/// and the solution is exact and strictly positive. Also returns the residual.
fn basic_solution(
    columns: &DMatrix<f64>,
    support: &[usize],
    rhs: &DVector<f64>,
) -> (Option<Vec<f64>>, f64) {
    let m = columns.select_columns(support);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax.max(1.0) {
        return (None, f64::INFINITY);
    }
    let Ok(mut lambda) = svd.solve(rhs, 0.0) else {
        return (None, f64::INFINITY);
    };
    // one step of iterative refinement
    if let Ok(correction) = svd.solve(&(rhs - &m * &lambda), 0.0) {
        lambda += correction;
    }
    let residual = (&m * &lambda - rhs).amax();
    if residual > EQUALITY_TOL || lambda.iter().any(|&l| l <= WEIGHT_FLOOR) {
        return (None, residual);
    }
    (Some(lambda.iter().copied().collect()), residual)
}

/// Optimum of `⟨x, Σ λ_k offdiag_k⟩` over the feasible simplex slice.
///
/// Among optimal basic solutions (objective within `1e-12`) the one with the
/// lexicographically smallest support wins.
pub fn lp_solve<A: AtomData>(atoms: &[A], x: &[f64], y: &[f64], side: Side) -> Result<LpSolution> {
    if atoms.is_empty() || atoms.len() > MAX_ATOMS {
        return Err(Error::Precondition(format!(
            "the LP handles 1..={MAX_ATOMS} atoms, got {}",
            atoms.len()
        )));
    }
    let n = y.len();
    for (k, atom) in atoms.iter().enumerate() {
        if atom.diag().len() != n || atom.offdiag().len() != x.len() {
            return Err(Error::Malformed(format!(
                "atom {k} has shape ({}, {}), expected ({n}, {})",
                atom.diag().len(),
                atom.offdiag().len(),
                x.len()
            )));
        }
    }
    let rows = n + 1;
    let columns = DMatrix::from_fn(rows, atoms.len(), |r, k| {
        if r == 0 {
            1.0
        } else {
            atoms[k].diag()[r - 1]
        }
    });
    let rhs = DVector::from_fn(rows, |r, _| if r == 0 { 1.0 } else { y[r - 1] });
    let objective: Vec<f64> = atoms.iter().map(|a| dot(x, a.offdiag())).collect();
    let better = |v: f64, best: f64| match side {
        Side::Upper => v > best + TIE_TOL,
        Side::Lower => v < best - TIE_TOL,
    };

    let mut best: Option<LpSolution> = None;
    let mut closest = f64::INFINITY;
    for k in 1..=rows.min(atoms.len()) {
        for_each_subset(atoms.len(), k, &mut |support| {
            let (solution, residual) = basic_solution(&columns, support, &rhs);
            closest = closest.min(residual);
            let Some(lambda) = solution else { return };
            let value = dot(
                &lambda,
                &support.iter().map(|&i| objective[i]).collect::<Vec<_>>(),
            );
            let replace = match &best {
                None => true,
                Some(b) => {
                    better(value, b.value)
                        || (!better(b.value, value) && support < b.support.as_slice())
                }
            };
            if replace {
                let mut weights = vec![0.0; atoms.len()];
                for (&i, &l) in support.iter().zip(&lambda) {
                    weights[i] = l;
                }
                best = Some(LpSolution {
                    value,
                    weights,
                    support: support.to_vec(),
                });
            }
        });
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no basic solution satisfies sum(lambda) = 1, sum(lambda * diag) = y with lambda >= 0 \
             (closest equality residual {closest:e}) for y = {y:?}"
        ))
    })
}
