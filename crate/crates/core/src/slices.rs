//! Support values of diagonal slices.
//!
//! For a fixed diagonal `y` and a direction `x` over pairs `i < j`,
//! `u_r(y, x) = sup { x·w : (y, w) ∈ D_r(n) }` and `l_r(y, x) = −u_r(y, −x)`.
//!
//! The local class is an LP over the `2ⁿ` commutative atoms. For the quantum
//! class at `n = 3` the optimum satisfies `[P_i, Σ_j x_ij P_j] = 0` (a unitary
//! rotation along `i[P_j, P_i]` would otherwise still increase `x·w` while
//! fixing `y`), so it is a trace on the universal algebra of those relations.
//! That algebra is `ℂ⁸ ⊕ M_2` for non-degenerate `x`, whose traces form the
//! nine-atom simplex of [`crate::universal3`], and the sup becomes an LP over
//! those atoms. Degenerate directions are attained commutatively.

pub mod lp;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pairs::{pair_count, pair_label, pairs};
use crate::tracial::{BlockAlgebra, BlockOperator, DqSample, TracialModel, TracialState};
use crate::universal3::{
    build_rep, normalize_direction, realizing_model, Direction3, NormalizedDirection, Universal3Rep,
};
use crate::{Error, Result};

pub use lp::{lp_solve, AtomData, LpSolution};

/// Largest question count for the local LP (`2ⁿ ≤ 16` atoms).
pub const MAX_LOCAL_QUESTIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceClass {
    Loc,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }
}

/// `u_r(y, x)` or `l_r(y, x)`, with `x` in canonical pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceQuery {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub cls: SliceClass,
    pub side: Side,
}

/// Query file entry: `x` is keyed by pair labels such as `"01"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryRecord {
    pub y: Vec<f64>,
    pub x: BTreeMap<String, f64>,
    pub cls: SliceClass,
    pub side: Side,
}

impl SliceQuery {
    pub fn new(y: Vec<f64>, x: Vec<f64>, cls: SliceClass, side: Side) -> Result<Self> {
        let q = Self { y, x, cls, side };
        q.check()?;
        Ok(q)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.y.len();
        if n == 0 {
            return Err(Error::Malformed(
                "a slice query needs at least one question".into(),
            ));
        }
        if let Some((i, v)) = self
            .y
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::Malformed(format!(
                "y[{i}] = {v} lies outside [0, 1]"
            )));
        }
        if self.x.len() != pair_count(n) {
            return Err(Error::Malformed(format!(
                "{n} questions need {} pair weights, got {}",
                pair_count(n),
                self.x.len()
            )));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("pair weights must be finite".into()));
        }
        Ok(())
    }

    /// The same query with `x ↦ −x` and the opposite side.
    pub fn negated(&self) -> Self {
        Self {
            y: self.y.clone(),
            x: self.x.iter().map(|v| -v).collect(),
            cls: self.cls,
            side: self.side.flip(),
        }
    }
}

impl TryFrom<QueryRecord> for SliceQuery {
    type Error = Error;

    fn try_from(r: QueryRecord) -> Result<Self> {
        let n = r.y.len();
        let labels: Vec<String> = pairs(n)
            .into_iter()
            .map(|(i, j)| pair_label(i, j))
            .collect();
        if let Some(extra) = r.x.keys().find(|k| !labels.contains(k)) {
            return Err(Error::Malformed(format!(
                "unknown pair label {extra:?} for {n} questions"
            )));
        }
        let x = labels
            .iter()
            .map(|l| {
                r.x.get(l)
                    .copied()
                    .ok_or_else(|| Error::Malformed(format!("missing pair weight {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SliceQuery::new(r.y, x, r.cls, r.side)
    }
}

impl From<&SliceQuery> for QueryRecord {
    fn from(q: &SliceQuery) -> Self {
        let x = pairs(q.n())
            .into_iter()
            .zip(&q.x)
            .map(|((i, j), v)| (pair_label(i, j), *v))
            .collect();
        QueryRecord {
            y: q.y.clone(),
            x,
            cls: q.cls,
            side: q.side,
        }
    }
}

pub fn parse_queries(json: &str) -> Result<Vec<SliceQuery>> {
    let records: Vec<QueryRecord> = serde_json::from_str(json)?;
    records.into_iter().map(SliceQuery::try_from).collect()
}

#[derive(Debug, Clone)]
pub struct SliceResult {
    pub value: f64,
    /// Optimal weights, one per atom of the LP that produced them.
    pub weights: Vec<f64>,
    pub realizing_model: TracialModel,
    /// Upper triangle `w` of the optimum, with `x·w = value`.
    pub achieved_w: Vec<f64>,
    /// Set when the value came from the commutative atoms alone.
    pub degenerate_path: bool,
    /// The universal algebra used for a non-degenerate quantum query.
    pub rep: Option<Universal3Rep>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Two subintervals of `[0, 1]` whose indicator functions are commuting
/// projections in `L^∞[0, 1]` with the Lebesgue trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalPair {
    pub p: (f64, f64),
    pub q: (f64, f64),
}

impl IntervalPair {
    /// `τ(PQ)`, the length of the overlap.
    pub fn overlap(&self) -> f64 {
        (self.p.1.min(self.q.1) - self.p.0.max(self.q.0)).max(0.0)
    }
}

/// The range of `τ(PQ)` for projections with traces `yp, yq`, together with
/// interval projections attaining each endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: IntervalPair,
    pub upper_witness: IntervalPair,
}

pub fn pair_bounds(yp: f64, yq: f64) -> Result<PairBounds> {
    for v in [yp, yq] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Precondition(format!(
                "trace {v} lies outside [0, 1]"
            )));
        }
    }
    // the complement of the larger trace is exact, so (1, t) gives [t, t]
    let (big, small) = if yp >= yq { (yp, yq) } else { (yq, yp) };
    Ok(PairBounds {
        lower: (small - (1.0 - big)).max(0.0),
        upper: yp.min(yq),
        lower_witness: IntervalPair {
            p: (0.0, yp),
            q: (1.0 - yq, 1.0),
        },
        upper_witness: IntervalPair {
            p: (0.0, yp),
            q: (0.0, yq),
        },
    })
}

/// `Σ x_ij · (extreme of τ(P_iP_j) in the direction of x_ij)`.
///
/// Always an upper (resp. lower) bound for `x·w`, and attained whenever the
/// pairs with `x_ij ≠ 0` form a forest, which covers every degenerate
/// three-question direction.
pub fn pair_bound_value(y: &[f64], x: &[f64], side: Side) -> Result<f64> {
    let n = y.len();
    if x.len() != pair_count(n) {
        return Err(Error::Malformed(format!(
            "{n} questions need {} pair weights",
            pair_count(n)
        )));
    }
    let mut total = 0.0;
    for (k, (i, j)) in pairs(n).into_iter().enumerate() {
        let b = pair_bounds(y[i], y[j])?;
        let high = (x[k] > 0.0) == (side == Side::Upper);
        total += x[k] * if high { b.upper } else { b.lower };
    }
    Ok(total)
}

/// A point evaluation on `{0, 1}ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAtom {
    pub alpha: Vec<u8>,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl LocalAtom {
    pub fn new(alpha: Vec<u8>) -> Self {
        let diag: Vec<f64> = alpha.iter().map(|&a| f64::from(a)).collect();
        let offdiag = pairs(alpha.len())
            .into_iter()
            .map(|(i, j)| diag[i] * diag[j])
            .collect();
        Self {
            alpha,
            diag,
            offdiag,
        }
    }

    /// All `2ⁿ` atoms, starting from `(1, …, 1)` and ending at `(0, …, 0)`.
    pub fn all(n: usize) -> Vec<LocalAtom> {
        (0..1usize << n)
            .map(|k| LocalAtom::new((0..n).map(|i| 1 - ((k >> (n - 1 - i)) & 1) as u8).collect()))
            .collect()
    }
}

impl AtomData for LocalAtom {
    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

fn commutative_model(atoms: &[LocalAtom], weights: &[f64]) -> Result<TracialModel> {
    let n = atoms[0].alpha.len();
    let algebra = BlockAlgebra::commutative(atoms.len())?;
    let trace = TracialState::new(weights.to_vec())?;
    let projections = (0..n)
        .map(|i| BlockOperator::scalars(&atoms.iter().map(|a| a.diag[i]).collect::<Vec<_>>()))
        .collect();
    TracialModel::two_outcome(algebra, trace, projections)
}

fn achieved<A: AtomData>(atoms: &[A], weights: &[f64], pairs: usize) -> Vec<f64> {
    let mut w = vec![0.0; pairs];
    for (atom, &l) in atoms.iter().zip(weights) {
        for (acc, v) in w.iter_mut().zip(atom.offdiag()) {
            *acc += l * v;
        }
    }
    w
}

/// `u_loc` or `l_loc` by the LP over the commutative atoms.
pub fn slice_local(q: &SliceQuery) -> Result<SliceResult> {
    q.check()?;
    let n = q.n();
    if n > MAX_LOCAL_QUESTIONS {
        return Err(Error::Unsupported(format!(
            "the local LP handles at most {MAX_LOCAL_QUESTIONS} questions, got {n}"
        )));
    }
    let atoms = LocalAtom::all(n);
    let sol = lp_solve(&atoms, &q.x, &q.y, q.side)?;
    let achieved_w = achieved(&atoms, &sol.weights, q.x.len());
    Ok(SliceResult {
        value: dot(&q.x, &achieved_w),
        realizing_model: commutative_model(&atoms, &sol.weights)?,
        weights: sol.weights,
        achieved_w,
        degenerate_path: true,
        rep: None,
    })
}

fn slice_q3_upper(y: &[f64], x: &[f64]) -> Result<SliceResult> {
    let direction = Direction3::from_slice(x)?;
    let NormalizedDirection::Scaled { a, b } = normalize_direction(&direction) else {
        return slice_local(&SliceQuery::new(
            y.to_vec(),
            x.to_vec(),
            SliceClass::Loc,
            Side::Upper,
        )?);
    };
    let rep = build_rep(a, b)?;
    let sol = lp_solve(&rep.atoms, x, y, Side::Upper)?;
    let achieved_w = achieved(&rep.atoms, &sol.weights, 3);
    Ok(SliceResult {
        value: dot(x, &achieved_w),
        realizing_model: realizing_model(&rep, &sol.weights)?,
        weights: sol.weights,
        achieved_w,
        degenerate_path: !rep.has_m2,
        rep: Some(rep),
    })
}

/// `u_q` or `l_q` for three questions; the lower value is `−u_q(y, −x)`.
pub fn slice_q3(q: &SliceQuery) -> Result<SliceResult> {
    q.check()?;
    if q.n() != 3 {
        return Err(Error::Unsupported(format!(
            "exact quantum slices need 3 questions, got {}; use `sample` and `dominate` instead",
            q.n()
        )));
    }
    match q.side {
        Side::Upper => slice_q3_upper(&q.y, &q.x),
        Side::Lower => {
            let negated: Vec<f64> = q.x.iter().map(|v| -v).collect();
            let mut r = slice_q3_upper(&q.y, &negated)?;
            r.value = dot(&q.x, &r.achieved_w);
            Ok(r)
        }
    }
}

pub fn slice(q: &SliceQuery) -> Result<SliceResult> {
    match q.cls {
        SliceClass::Loc => slice_local(q),
        SliceClass::Q => slice_q3(q),
    }
}

/// Of the samples whose diagonal lies within `delta` of `y` (sup norm), how
/// far the best one beats the exact bound beyond the Lipschitz allowance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceEntry {
    pub query_id: usize,
    /// The exact bound `u_r(y, x)` or `l_r(y, x)`.
    pub value: f64,
    pub degenerate_path: bool,
    pub neighbors: usize,
    /// `max (x·w − u − allowance)` for upper queries and
    /// `max (l − x·w − allowance)` for lower ones; `None` without neighbors.
    pub max_residual: Option<f64>,
    /// The raw gap `x·w − u` (or `l − x·w`) of the same neighborhood.
    pub max_gap: Option<f64>,
}

impl DominanceEntry {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual.is_some_and(|r| r <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub delta: f64,
    pub tol: f64,
    pub entries: Vec<DominanceEntry>,
}

impl DominanceReport {
    pub fn no_data(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.max_residual.is_none())
            .count()
    }

    pub fn violations(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.max_residual.is_some_and(|r| r > self.tol))
            .count()
    }

    /// Every query has data and none is exceeded.
    pub fn is_clean(&self) -> bool {
        self.entries.iter().all(|e| e.passes(self.tol))
    }

    /// The largest residual over all queries with data.
    pub fn tightest(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.max_residual)
            .reduce(f64::max)
    }
}

/// Lipschitz constant of `y ↦ u_r(y, x)` in the sup norm.
///
/// Moving `τ(P_i)` by `ε` through a sub- or super-projection moves each
/// `τ(P_iP_j)` by at most `ε`, and a pair sees both endpoints move.
pub fn lipschitz_constant(x: &[f64]) -> f64 {
    2.0 * x.iter().map(|v| v.abs()).sum::<f64>()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// Checks that no sample beats any exact slice bound.
pub fn dominance_check(
    samples: &[DqSample],
    queries: &[SliceQuery],
    delta: f64,
    tol: f64,
) -> Result<DominanceReport> {
    let bounds = queries.par_iter().map(slice).collect::<Result<Vec<_>>>()?;
    let entries = queries
        .par_iter()
        .zip(&bounds)
        .enumerate()
        .map(|(id, (q, bound))| {
            let lip = lipschitz_constant(&q.x);
            let mut neighbors = 0;
            let mut max_residual: Option<f64> = None;
            let mut max_gap: Option<f64> = None;
            for s in samples.iter().filter(|s| s.diag.len() == q.n()) {
                let dist = sup_distance(&s.diag, &q.y);
                if dist > delta {
                    continue;
                }
                neighbors += 1;
                let xw = dot(&q.x, &s.upper);
                let gap = match q.side {
                    Side::Upper => xw - bound.value,
                    Side::Lower => bound.value - xw,
                };
                let residual = gap - lip * dist;
                max_gap = Some(max_gap.map_or(gap, |g| g.max(gap)));
                max_residual = Some(max_residual.map_or(residual, |r| r.max(residual)));
            }
            DominanceEntry {
                query_id: id,
                value: bound.value,
                degenerate_path: bound.degenerate_path,
                neighbors,
                max_residual,
                max_gap,
            }
        })
        .collect();
    Ok(DominanceReport {
        delta,
        tol,
        entries,
    })
}

/// CSV with columns `query-id,value,degenerate_path,max_residual`; the
/// residual cell is empty for queries without neighboring samples.
pub fn write_report_csv<W: std::io::Write>(out: W, report: &DominanceReport) -> Result<()> {
    let fmt = crate::tracial::format_float;
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    wtr.write_record(["query-id", "value", "degenerate_path", "max_residual"])?;
    for e in &report.entries {
        wtr.write_record([
            e.query_id.to_string(),
            fmt(e.value),
            e.degenerate_path.to_string(),
            e.max_residual.map(fmt).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
