//! Correlation tensors `p(i,j|x,y)`, class validation, and the affine maps
//! between two-outcome synchronous correlations and correlation matrices.
//!
//! Tensors are indexed `(x, y, i, j)`: questions outer, outcomes inner. The
//! outcome embedding pairs `(x, i)` with the question label `x·m + i`.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[inline]
fn tensor_index(n: usize, m: usize, x: usize, y: usize, i: usize, j: usize) -> usize {
    ((x * n + y) * m + i) * m + j
}

/// Question label of the pair `(x, i)` in the `nm`-question two-outcome setting.
#[inline]
pub fn paired_label(x: usize, i: usize, m: usize) -> usize {
    x * m + i
}

/// Joint outcome probabilities `p(i,j|x,y)` for `n` questions with `m` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationFile", into = "CorrelationFile")]
pub struct CorrelationTensor {
    n: usize,
    m: usize,
    p: Vec<f64>,
}

/// On-disk layout: `{"n":…, "m":…, "p":[x][y][i][j]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationFile {
    pub n: usize,
    pub m: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
}

impl CorrelationTensor {
    /// Builds a tensor from a flat `(x,y,i,j)` row-major buffer.
    pub fn new(n: usize, m: usize, p: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Malformed(format!(
                "question and outcome counts must be positive (n={n}, m={m})"
            )));
        }
        let expected = n * n * m * m;
        if p.len() != expected {
            return Err(Error::Malformed(format!(
                "tensor has {} entries, expected n²m² = {expected}",
                p.len()
            )));
        }
        if let Some(k) = p.iter().position(|v| !v.is_finite()) {
            return Err(Error::Malformed(format!("entry {k} is not finite")));
        }
        Ok(Self { n, m, p })
    }

    pub fn from_fn(
        n: usize,
        m: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut p = Vec::with_capacity(n * n * m * m);
        for x in 0..n {
            for y in 0..n {
                for i in 0..m {
                    for j in 0..m {
                        p.push(f(x, y, i, j));
                    }
                }
            }
        }
        Self { n, m, p }
    }

    pub fn from_nested(n: usize, m: usize, nested: &[Vec<Vec<Vec<f64>>>]) -> Result<Self> {
        let shape_err = |what: &str| {
            Error::Malformed(format!(
                "nested tensor shape mismatch at {what} (n={n}, m={m})"
            ))
        };
        if nested.len() != n {
            return Err(shape_err("x"));
        }
        let mut p = Vec::with_capacity(n * n * m * m);
        for rows in nested {
            if rows.len() != n {
                return Err(shape_err("y"));
            }
            for block in rows {
                if block.len() != m {
                    return Err(shape_err("i"));
                }
                for row in block {
                    if row.len() != m {
                        return Err(shape_err("j"));
                    }
                    p.extend_from_slice(row);
                }
            }
        }
        Self::new(n, m, p)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.n)
            .map(|x| {
                (0..self.n)
                    .map(|y| {
                        (0..self.m)
                            .map(|i| (0..self.m).map(|j| self.get(x, y, i, j)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, i: usize, j: usize) -> f64 {
        self.p[tensor_index(self.n, self.m, x, y, i, j)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Largest entrywise difference; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n != other.n || self.m != other.m {
            return f64::INFINITY;
        }
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<CorrelationFile> for CorrelationTensor {
    type Error = Error;

    fn try_from(file: CorrelationFile) -> Result<Self> {
        Self::from_nested(file.n, file.m, &file.p)
    }
}

impl From<CorrelationTensor> for CorrelationFile {
    fn from(t: CorrelationTensor) -> Self {
        CorrelationFile {
            n: t.n,
            m: t.m,
            p: t.to_nested(),
        }
    }
}

/// Constraint families checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    Nonnegativity,
    Normalization,
    NonSignaling,
    Synchronicity,
}

/// Worst offender of one constraint family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub x: usize,
    pub y: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyResiduals {
    pub nonnegativity: f64,
    pub normalization: f64,
    pub non_signaling: f64,
    pub synchronicity: f64,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub is_correlation: bool,
    pub is_nonsignaling: bool,
    pub is_synchronous: bool,
    pub max_violation: f64,
    pub residuals: FamilyResiduals,
    /// One entry per family whose residual exceeds the tolerance.
    pub failures: Vec<Violation>,
}

impl ClassReport {
    /// Synchronous non-signaling correlation: the setting of every map in this module.
    pub fn is_synchronous_nonsignaling(&self) -> bool {
        self.is_synchronous && self.is_nonsignaling
    }

    pub fn failed(&self, constraint: Constraint) -> bool {
        self.failures.iter().any(|v| v.constraint == constraint)
    }
}

#[derive(Default)]
struct Worst(Option<Violation>);

impl Worst {
    fn offer(&mut self, v: Violation) {
        if self.0.as_ref().is_none_or(|w| v.residual > w.residual) {
            self.0 = Some(v);
        }
    }

    fn residual(&self) -> f64 {
        self.0.as_ref().map_or(0.0, |v| v.residual)
    }
}

/// Checks the correlation, non-signaling, and synchronicity constraints.
///
/// Non-signaling and synchronicity are properties of correlations, so their
/// flags are only set when `is_correlation` holds as well.
pub fn validate(t: &CorrelationTensor, tol: f64) -> ClassReport {
    let (n, m) = (t.n, t.m);
    let mut neg = Worst::default();
    let mut norm = Worst::default();
    let mut sig = Worst::default();
    let mut sync = Worst::default();

    for x in 0..n {
        for y in 0..n {
            let mut total = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let v = t.get(x, y, i, j);
                    total += v;
                    neg.offer(Violation {
                        constraint: Constraint::Nonnegativity,
                        x,
                        y,
                        i: Some(i),
                        j: Some(j),
                        residual: (-v).max(0.0),
                    });
                    if x == y && i != j {
                        sync.offer(Violation {
                            constraint: Constraint::Synchronicity,
                            x,
                            y,
                            i: Some(i),
                            j: Some(j),
                            residual: v.abs(),
                        });
                    }
                }
            }
            norm.offer(Violation {
                constraint: Constraint::Normalization,
                x,
                y,
                i: None,
                j: None,
                residual: (total - 1.0).abs(),
            });
        }
    }

    // Alice's marginal must not depend on y, Bob's must not depend on x.
    for x in 0..n {
        for i in 0..m {
            let reference: f64 = (0..m).map(|j| t.get(x, 0, i, j)).sum();
            for y in 1..n {
                let here: f64 = (0..m).map(|j| t.get(x, y, i, j)).sum();
                sig.offer(Violation {
                    constraint: Constraint::NonSignaling,
                    x,
                    y,
                    i: Some(i),
                    j: None,
                    residual: (here - reference).abs(),
                });
            }
        }
    }
    for y in 0..n {
        for j in 0..m {
            let reference: f64 = (0..m).map(|i| t.get(0, y, i, j)).sum();
            for x in 1..n {
                let here: f64 = (0..m).map(|i| t.get(x, y, i, j)).sum();
                sig.offer(Violation {
                    constraint: Constraint::NonSignaling,
                    x,
                    y,
                    i: None,
                    j: Some(j),
                    residual: (here - reference).abs(),
                });
            }
        }
    }

    let residuals = FamilyResiduals {
        nonnegativity: neg.residual(),
        normalization: norm.residual(),
        non_signaling: sig.residual(),
        synchronicity: sync.residual(),
    };
    let is_correlation = residuals.nonnegativity <= tol && residuals.normalization <= tol;
    let failures: Vec<Violation> = [neg, norm, sig, sync]
        .into_iter()
        .filter_map(|w| w.0)
        .filter(|v| v.residual > tol)
        .collect();
    ClassReport {
        is_correlation,
        is_nonsignaling: is_correlation && residuals.non_signaling <= tol,
        is_synchronous: is_correlation && residuals.synchronicity <= tol,
        max_violation: residuals
            .nonnegativity
            .max(residuals.normalization)
            .max(residuals.non_signaling)
            .max(residuals.synchronicity),
        residuals,
        failures,
    }
}

/// Marginal densities `p_A(i|x)` and `p_B(j|y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    /// Indexed `[x][i]`.
    pub pa: Vec<Vec<f64>>,
    /// Indexed `[y][j]`.
    pub pb: Vec<Vec<f64>>,
    /// Set when the tensor signals; the marginals are then averaged over the
    /// other party's question instead of read off at question 0.
    pub signaling: bool,
}

pub fn marginals(t: &CorrelationTensor) -> Marginals {
    let (n, m) = (t.n, t.m);
    let signaling = validate(t, crate::DEFAULT_TOL).residuals.non_signaling > crate::DEFAULT_TOL;
    let others: Vec<usize> = if signaling { (0..n).collect() } else { vec![0] };
    let scale = 1.0 / others.len() as f64;
    let pa = (0..n)
        .map(|x| {
            (0..m)
                .map(|i| {
                    others
                        .iter()
                        .map(|&y| (0..m).map(|j| t.get(x, y, i, j)).sum::<f64>())
                        .sum::<f64>()
                        * scale
                })
                .collect()
        })
        .collect();
    let pb = (0..n)
        .map(|y| {
            (0..m)
                .map(|j| {
                    others
                        .iter()
                        .map(|&x| (0..m).map(|i| t.get(x, y, i, j)).sum::<f64>())
                        .sum::<f64>()
                        * scale
                })
                .collect()
        })
        .collect();
    Marginals { pa, pb, signaling }
}

/// Symmetric matrix `w_{x,y} = p(0,0|x,y)` of a two-outcome synchronous correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct CorrelationMatrix {
    n: usize,
    w: Vec<f64>,
}

/// On-disk layout: `{"n":…, "w":[[…]…]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub w: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Builds from a row-major `n×n` buffer. Only the shape is checked here;
    /// see [`CorrelationMatrix::check`] for the feasibility inequalities.
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Malformed("matrix size must be positive".into()));
        }
        if w.len() != n * n {
            return Err(Error::Malformed(format!(
                "matrix has {} entries, expected {}",
                w.len(),
                n * n
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("matrix entry is not finite".into()));
        }
        Ok(Self { n, w })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(
                "matrix rows must all have length n".into(),
            ));
        }
        Self::new(n, rows.concat())
    }

    /// Assembles a matrix from its diagonal and upper triangle (canonical pair order).
    pub fn from_parts(diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if upper.len() != crate::pairs::pair_count(n) {
            return Err(Error::Malformed(format!(
                "upper triangle has {} entries, expected {}",
                upper.len(),
                crate::pairs::pair_count(n)
            )));
        }
        let mut w = vec![0.0; n * n];
        for (x, &d) in diag.iter().enumerate() {
            w[x * n + x] = d;
        }
        for (k, (x, y)) in crate::pairs::pairs(n).into_iter().enumerate() {
            w[x * n + y] = upper[k];
            w[y * n + x] = upper[k];
        }
        Self::new(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.w[x * self.n + y]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|x| self.get(x, x)).collect()
    }

    /// Upper triangle in canonical pair order.
    pub fn upper(&self) -> Vec<f64> {
        crate::pairs::pairs(self.n)
            .into_iter()
            .map(|(x, y)| self.get(x, y))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks symmetry, `0 ≤ w_{x,y} ≤ min(w_{x,x}, w_{y,y})`, and
    /// `1 + w_{x,y} − w_{x,x} − w_{y,y} ≥ 0`, reporting the worst failure.
    pub fn check(&self, tol: f64) -> Result<()> {
        let n = self.n;
        let mut worst: Option<(&'static str, usize, usize, f64)> = None;
        let mut offer = |name: &'static str, x: usize, y: usize, r: f64| {
            if r > tol && worst.is_none_or(|w| r > w.3) {
                worst = Some((name, x, y, r));
            }
        };
        for x in 0..n {
            for y in 0..n {
                let w = self.get(x, y);
                let (wx, wy) = (self.get(x, x), self.get(y, y));
                offer(
                    "symmetry w[x][y] = w[y][x]",
                    x,
                    y,
                    (w - self.get(y, x)).abs(),
                );
                offer("nonnegativity w[x][y] >= 0", x, y, -w);
                offer("w[x][y] <= w[x][x]", x, y, w - wx);
                offer("w[x][y] <= w[y][y]", x, y, w - wy);
                offer(
                    "1 + w[x][y] - w[x][x] - w[y][y] >= 0",
                    x,
                    y,
                    wx + wy - 1.0 - w,
                );
            }
        }
        match worst {
            None => Ok(()),
            Some((inequality, x, y, residual)) => Err(Error::InfeasibleMatrix {
                inequality,
                x,
                y,
                residual,
            }),
        }
    }
}

impl TryFrom<MatrixFile> for CorrelationMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        let m = Self::from_rows(&file.w)?;
        if m.n != file.n {
            return Err(Error::Malformed(format!(
                "declared n={} but matrix is {}×{}",
                file.n, m.n, m.n
            )));
        }
        Ok(m)
    }
}

impl From<CorrelationMatrix> for MatrixFile {
    fn from(m: CorrelationMatrix) -> Self {
        MatrixFile {
            n: m.n,
            w: m.rows(),
        }
    }
}

/// The affine inverse of the restriction map, over any numeric field.
///
/// Given a row-major `n×n` matrix `w`, returns the `(n, 2)` tensor entries
/// with diagonal blocks `[[w_xx, 0], [0, 1 − w_xx]]` and off-diagonal blocks
/// `[[w_xy, w_xx − w_xy], [w_yy − w_xy, 1 + w_xy − w_xx − w_yy]]`. No
/// feasibility is checked, so the map can be applied to signed or exact data.
pub fn expand_affine<T: Num + Copy>(n: usize, w: &[T]) -> Vec<T> {
    assert_eq!(w.len(), n * n, "expand_affine needs an n×n matrix");
    let mut out = Vec::with_capacity(n * n * 4);
    for x in 0..n {
        for y in 0..n {
            let wxy = w[x * n + y];
            let wxx = w[x * n + x];
            let wyy = w[y * n + y];
            if x == y {
                out.extend_from_slice(&[wxx, T::zero(), T::zero(), T::one() - wxx]);
            } else {
                out.extend_from_slice(&[wxy, wxx - wxy, wyy - wxy, T::one() + wxy - wxx - wyy]);
            }
        }
    }
    out
}

/// Relabels an `(n, m)` tensor as the `nm×nm` matrix `w_{(x,i),(y,j)} = q(i,j|x,y)`.
pub fn outcome_pairing<T: Copy>(n: usize, m: usize, q: &[T]) -> Vec<T> {
    assert_eq!(
        q.len(),
        n * n * m * m,
        "outcome_pairing needs an (n,m) tensor"
    );
    let nm = n * m;
    let mut w = Vec::with_capacity(nm * nm);
    for x in 0..n {
        for i in 0..m {
            for y in 0..n {
                for j in 0..m {
                    w.push(q[tensor_index(n, m, x, y, i, j)]);
                }
            }
        }
    }
    w
}

/// The affine preimage of the outcome projection: `(n, m)` entries to
/// `(nm, 2)` entries, over any numeric field.
pub fn affine_preimage<T: Num + Copy>(n: usize, m: usize, q: &[T]) -> Vec<T> {
    expand_affine(n * m, &outcome_pairing(n, m, q))
}

/// A restricted correlation matrix together with the asymmetry that the
/// symmetrization removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub matrix: CorrelationMatrix,
    pub asymmetry: f64,
}

/// Reads off `w_{x,y} = p(0,0|x,y)` from a two-outcome synchronous
/// non-signaling tensor, averaging the `(x,y)` and `(y,x)` entries.
pub fn restrict(t: &CorrelationTensor, tol: f64) -> Result<Restriction> {
    if t.m != 2 {
        return Err(Error::Unsupported(format!(
            "restriction needs two outcomes, got m={}",
            t.m
        )));
    }
    let report = validate(t, tol);
    if !report.is_synchronous_nonsignaling() {
        return Err(Error::Precondition(format!(
            "tensor is not a synchronous non-signaling correlation (max violation {:e})",
            report.max_violation
        )));
    }
    let n = t.n;
    let mut w = vec![0.0; n * n];
    let mut asymmetry: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (t.get(x, y, 0, 0), t.get(y, x, 0, 0));
            asymmetry = asymmetry.max((a - b).abs());
            w[x * n + y] = 0.5 * (a + b);
        }
    }
    if asymmetry > tol {
        return Err(Error::Inconsistent {
            what: "p(0,0|x,y) differs from p(0,0|y,x)".into(),
            residual: asymmetry,
            tol,
        });
    }
    Ok(Restriction {
        matrix: CorrelationMatrix::new(n, w)?,
        asymmetry,
    })
}

/// Builds the synchronous non-signaling two-outcome tensor of a feasible matrix.
pub fn expand(w: &CorrelationMatrix) -> Result<CorrelationTensor> {
    w.check(crate::DEFAULT_TOL)?;
    CorrelationTensor::new(w.n, 2, expand_affine(w.n, &w.w))
}

/// Embeds a synchronous non-signaling `(n, m)` correlation into the
/// `nm`-question two-outcome set, pairing `(x, i)` with `x·m + i`.
pub fn embed_outcomes(q: &CorrelationTensor, tol: f64) -> Result<CorrelationTensor> {
    let report = validate(q, tol);
    if !report.is_synchronous_nonsignaling() {
        return Err(Error::Precondition(format!(
            "outcome embedding needs a synchronous non-signaling correlation (max violation {:e})",
            report.max_violation
        )));
    }
    let (n, m) = (q.n, q.m);
    let marg = marginals(q);
    let nm = n * m;
    let mut p = vec![0.0; nm * nm * 4];
    for x in 0..n {
        for i in 0..m {
            let big_x = paired_label(x, i, m);
            for y in 0..n {
                for j in 0..m {
                    let big_y = paired_label(y, j, m);
                    let joint = q.get(x, y, i, j);
                    let (qa, qb) = (marg.pa[x][i], marg.pb[y][j]);
                    let base = tensor_index(nm, 2, big_x, big_y, 0, 0);
                    p[base] = joint;
                    p[base + 1] = qa - joint;
                    p[base + 2] = qb - joint;
                    p[base + 3] = 1.0 - qa - qb + joint;
                }
            }
        }
    }
    CorrelationTensor::new(nm, 2, p)
}

/// Result of projecting a two-outcome tensor back to `m` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// `π(p)` is a synchronous non-signaling correlation, so `p` lies in the face `F`.
    InFace(CorrelationTensor),
    /// `π(p)` fails at least one constraint; the report names which.
    NotInFace {
        projected: CorrelationTensor,
        report: ClassReport,
    },
}

impl Projection {
    pub fn in_face(&self) -> Option<&CorrelationTensor> {
        match self {
            Projection::InFace(t) => Some(t),
            Projection::NotInFace { .. } => None,
        }
    }
}

/// Computes `π(p)(i,j|x,y) = p(0,0|(x,i),(y,j))` and tests membership of `p`
/// in the face of correlations whose projection is synchronous and non-signaling.
pub fn project_outcomes(p: &CorrelationTensor, n: usize, m: usize, tol: f64) -> Result<Projection> {
    if p.m != 2 {
        return Err(Error::Unsupported(format!(
            "outcome projection needs a two-outcome tensor, got m={}",
            p.m
        )));
    }
    if n == 0 || m == 0 || p.n != n * m {
        return Err(Error::Malformed(format!(
            "tensor has {} questions, expected n·m = {}·{} = {}",
            p.n,
            n,
            m,
            n * m
        )));
    }
    if !validate(p, tol).is_synchronous {
        return Err(Error::Precondition(
            "outcome projection needs a synchronous two-outcome correlation".into(),
        ));
    }
    let projected = CorrelationTensor::from_fn(n, m, |x, y, i, j| {
        p.get(paired_label(x, i, m), paired_label(y, j, m), 0, 0)
    });
    let report = validate(&projected, tol);
    if report.is_synchronous_nonsignaling() {
        Ok(Projection::InFace(projected))
    } else {
        Ok(Projection::NotInFace { projected, report })
    }
}

/// The non-face counterexample matrices for two questions and two outcomes:
/// all three share diagonal blocks `diag(½, ½)`, and their off-diagonal
/// blocks are constant `¼` (`p`), `½` (`q`), and `0` (`s`).
pub mod remark_fixture {
    use super::CorrelationTensor;

    fn with_offdiag(value: f64) -> CorrelationTensor {
        CorrelationTensor::from_fn(2, 2, |x, y, i, j| {
            if x == y {
                if i == j {
                    0.5
                } else {
                    0.0
                }
            } else {
                value
            }
        })
    }

    pub fn p() -> CorrelationTensor {
        with_offdiag(0.25)
    }

    pub fn q() -> CorrelationTensor {
        with_offdiag(0.5)
    }

    pub fn s() -> CorrelationTensor {
        with_offdiag(0.0)
    }
}
