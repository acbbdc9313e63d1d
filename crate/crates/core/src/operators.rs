//! Generalized adjoints and sampled operator-class predicates.
//!
//! Every predicate quantifies over sampled pairs: unit-sphere samples plus
//! all ordered pairs of standard basis vectors. The report keeps the pair
//! attaining the largest residual so a failure can be replayed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{basis, condition_number, is_finite_mat, serde_matrix, serde_vector, Matrix, Vector};
use crate::normspace::NormModel;
use crate::sip::{Side, SipContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearOperator(#[serde(with = "serde_matrix")] Matrix);

impl LinearOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::input("operator matrix must be square and non-empty"));
        }
        if !is_finite_mat(&m) {
            return Err(Error::input("operator matrix has non-finite entries"));
        }
        Ok(LinearOperator(m))
    }

    pub fn from_rows(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::input("row data does not fill an n×n matrix"));
        }
        Self::new(Matrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        LinearOperator(Matrix::identity(n, n))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.0 * x
    }

    pub fn compose(&self, other: &LinearOperator) -> LinearOperator {
        LinearOperator(&self.0 * &other.0)
    }

    pub fn scale(&self, s: f64) -> LinearOperator {
        LinearOperator(&self.0 * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "serde_vector")]
    pub x: Vector,
    #[serde(with = "serde_vector")]
    pub y: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub verdict: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    pub samples: usize,
}

/// How many random pairs a predicate draws, and from which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { count: 500, seed: 0 }
    }
}

impl Sampling {
    pub fn new(count: usize, seed: u64) -> Self {
        Sampling { count, seed }
    }
}

pub const DEFAULT_TOL: f64 = 1e-6;

const SECOND_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub(crate) fn sample_pairs(model: &NormModel, sampling: Sampling) -> Vec<(Vector, Vector)> {
    let n = model.dim();
    let xs = model.unit_directions(sampling.count, sampling.seed);
    let ys = model.unit_directions(sampling.count, sampling.seed ^ SECOND_STREAM);
    let mut pairs: Vec<(Vector, Vector)> = xs.into_iter().zip(ys).collect();
    for i in 0..n {
        for j in 0..n {
            pairs.push((basis(n, i), basis(n, j)));
        }
    }
    pairs
}

pub(crate) fn sample_points(model: &NormModel, sampling: Sampling) -> Vec<Vector> {
    let n = model.dim();
    let mut pts = model.unit_directions(sampling.count, sampling.seed);
    pts.extend((0..n).map(|i| basis(n, i)));
    pts
}

fn lex_cmp(a: &(Vector, Vector), b: &(Vector, Vector)) -> std::cmp::Ordering {
    a.0.iter()
        .chain(a.1.iter())
        .zip(b.0.iter().chain(b.1.iter()))
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Evaluate `residual` on all pairs in parallel and reduce deterministically.
pub(crate) fn max_residual<F>(pairs: Vec<(Vector, Vector)>, tol: f64, residual: F) -> PredicateReport
where
    F: Fn(&Vector, &Vector) -> f64 + Sync,
{
    let values: Vec<f64> = pairs.par_iter().map(|(x, y)| residual(x, y)).collect();
    reduce_residuals(pairs, &values, tol)
}

/// Max residual (NaN counts as infinite), ties broken by the
/// lexicographically smallest witness.
pub(crate) fn reduce_residuals(pairs: Vec<(Vector, Vector)>, values: &[f64], tol: f64) -> PredicateReport {
    let key = |r: f64| if r.is_nan() { f64::INFINITY } else { r };
    let samples = pairs.len();
    let mut best: Option<usize> = None;
    for i in 0..values.len() {
        best = match best {
            Some(b) if !(key(values[i]) > key(values[b])
                || (key(values[i]) == key(values[b]) && lex_cmp(&pairs[i], &pairs[b]).is_lt())) => Some(b),
            _ => Some(i),
        };
    }
    match best {
        None => PredicateReport {
            verdict: true,
            max_residual: 0.0,
            witness: None,
            samples: 0,
        },
        Some(b) => {
            let max = key(values[b]);
            let (x, y) = pairs[b].clone();
            PredicateReport {
                verdict: max <= tol,
                max_residual: max,
                witness: Some(Witness { x, y }),
                samples,
            }
        }
    }
}

fn check_operator(ctx: &SipContext, a: &LinearOperator) -> Result<()> {
    if a.dim() != ctx.dim() {
        return Err(Error::input(format!(
            "{}×{} operator on a {}-dimensional model",
            a.dim(),
            a.dim(),
            ctx.dim()
        )));
    }
    Ok(())
}

fn require_smooth(ctx: &SipContext, op: &'static str) -> Result<()> {
    if ctx.model().is_smooth() {
        Ok(())
    } else {
        Err(Error::Unsupported {
            op,
            gate: "classify",
            reason: "needs the unique semi-inner product of a smooth model".into(),
        })
    }
}

/// `Aᵀ(y)`: the unique vector with `[A x, y] = [x, Aᵀ(y)]` for every `x`.
pub fn gen_adjoint_apply(ctx: &SipContext, a: &LinearOperator, y: &Vector) -> Result<Vector> {
    require_smooth(ctx, "gen_adjoint_apply")?;
    check_operator(ctx, a)?;
    ctx.model().check_dim(y)?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::input("generalized adjoint is evaluated at a nonzero vector"));
    }
    let w = adjoint_raw(ctx, a, y)?;
    let mut worst = 0.0f64;
    for x in ctx.model().unit_directions(50, 0x5eed) {
        let lhs = ctx.sip_raw(&a.apply(&x), y);
        let rhs = ctx.sip_raw(&x, &w);
        worst = worst.max((lhs - rhs).abs());
    }
    let scale = a.matrix().amax().max(1.0) * ctx.norm(y).max(1.0);
    if worst > 1e-7 * scale {
        return Err(Error::numeric("generalized adjoint fails its defining identity", worst));
    }
    Ok(w)
}

fn adjoint_raw(ctx: &SipContext, a: &LinearOperator, y: &Vector) -> Result<Vector> {
    let n = ctx.dim();
    let c = Vector::from_iterator(n, (0..n).map(|i| ctx.sip_raw(&a.apply(&basis(n, i)), y)));
    if c.iter().all(|&v| v == 0.0) {
        return Ok(Vector::zeros(n));
    }
    ctx.riesz_representer(&c)
}

/// Self-adjointness in the sense of the norm derivative:
/// `ρ'₊(A x, y) = ρ'₊(x, A y)`. Works on non-smooth models.
pub fn is_self_adjoint(ctx: &SipContext, a: &LinearOperator, sampling: Sampling, tol: f64) -> Result<PredicateReport> {
    check_operator(ctx, a)?;
    let pairs = sample_pairs(ctx.model(), sampling);
    Ok(max_residual(pairs, tol, |x, y| self_adjoint_residual(ctx, a, x, y)))
}

/// `[A x, y] = [x, A y]` on sampled pairs.
pub fn is_adjoint_abelian(ctx: &SipContext, a: &LinearOperator, sampling: Sampling, tol: f64) -> Result<PredicateReport> {
    require_smooth(ctx, "is_adjoint_abelian")?;
    check_operator(ctx, a)?;
    let pairs = sample_pairs(ctx.model(), sampling);
    Ok(max_residual(pairs, tol, |x, y| adjoint_abelian_residual(ctx, a, x, y)))
}

/// Norm preservation on samples and, on smooth models, preservation of the
/// semi-inner product on pairs.
pub fn is_isometry(ctx: &SipContext, u: &LinearOperator, sampling: Sampling, tol: f64) -> Result<PredicateReport> {
    check_operator(ctx, u)?;
    let pairs = sample_pairs(ctx.model(), sampling);
    Ok(max_residual(pairs, tol, |x, y| isometry_residual(ctx, u, x, y)))
}

fn self_adjoint_residual(ctx: &SipContext, a: &LinearOperator, x: &Vector, y: &Vector) -> f64 {
    (ctx.rho(&a.apply(x), y, Side::Plus) - ctx.rho(x, &a.apply(y), Side::Plus)).abs()
}

fn adjoint_abelian_residual(ctx: &SipContext, a: &LinearOperator, x: &Vector, y: &Vector) -> f64 {
    (ctx.sip_raw(&a.apply(x), y) - ctx.sip_raw(x, &a.apply(y))).abs()
}

fn isometry_residual(ctx: &SipContext, u: &LinearOperator, x: &Vector, y: &Vector) -> f64 {
    let (ux, uy) = (u.apply(x), u.apply(y));
    let mut r = (ctx.norm(&ux) - ctx.norm(x))
        .abs()
        .max((ctx.norm(&uy) - ctx.norm(y)).abs());
    if ctx.model().is_smooth() {
        r = r.max((ctx.sip_raw(&ux, &uy) - ctx.sip_raw(x, y)).abs());
    }
    r
}

/// The operator predicates, by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    SelfAdjoint,
    AdjointAbelian,
    Isometry,
    IsoAbelian,
}

/// Residual of one predicate at a single pair, the quantity maximized by
/// the sampled checks. For `IsoAbelian` only `w.y` is used.
pub fn witness_residual(ctx: &SipContext, pred: Predicate, a: &LinearOperator, w: &Witness) -> Result<f64> {
    check_operator(ctx, a)?;
    ctx.model().check_dim(&w.x)?;
    ctx.model().check_dim(&w.y)?;
    Ok(match pred {
        Predicate::SelfAdjoint => self_adjoint_residual(ctx, a, &w.x, &w.y),
        Predicate::AdjointAbelian => {
            require_smooth(ctx, "witness_residual")?;
            adjoint_abelian_residual(ctx, a, &w.x, &w.y)
        }
        Predicate::Isometry => isometry_residual(ctx, a, &w.x, &w.y),
        Predicate::IsoAbelian => {
            require_smooth(ctx, "witness_residual")?;
            let inv = a.matrix().clone().try_inverse().ok_or_else(|| Error::input("operator is singular"))?;
            ctx.norm(&(&inv * &w.y - adjoint_raw(ctx, a, &w.y)?))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoAbelianReport {
    #[serde(flatten)]
    pub report: PredicateReport,
    pub isometry_verdict: bool,
    pub consistent: bool,
}

/// Iso-abelian test through `U⁻¹ = Uᵀ`, cross-checked against [`is_isometry`].
pub fn iso_abelian_check(ctx: &SipContext, u: &LinearOperator, sampling: Sampling, tol: f64) -> Result<IsoAbelianReport> {
    require_smooth(ctx, "iso_abelian_check")?;
    check_operator(ctx, u)?;
    let cond = condition_number(u.matrix());
    if !(cond < 1e12) {
        return Err(Error::input(format!("operator is singular (condition number {cond:e})")));
    }
    let inv = u.matrix().clone().try_inverse().ok_or_else(|| Error::input("operator is singular"))?;
    let ys = sample_points(ctx.model(), sampling);
    let residuals: Vec<Result<f64>> = ys
        .par_iter()
        .map(|y| Ok(ctx.norm(&(&inv * y - adjoint_raw(ctx, u, y)?))))
        .collect();
    let values = residuals.into_iter().collect::<Result<Vec<f64>>>()?;
    let pairs = ys.into_iter().map(|y| (y.clone(), y)).collect();
    let report = reduce_residuals(pairs, &values, tol);
    let iso = is_isometry(ctx, u, sampling, tol)?;
    Ok(IsoAbelianReport {
        consistent: iso.verdict == report.verdict,
        isometry_verdict: iso.verdict,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointAlgebraReport {
    #[serde(flatten)]
    pub report: PredicateReport,
    pub product_residual: f64,
    pub scalar_residual: f64,
}

/// Residuals of `(AB)ᵀ = BᵀAᵀ` and `(λA)ᵀ = λAᵀ` on sampled vectors.
pub fn adjoint_algebra_check(
    ctx: &SipContext,
    a: &LinearOperator,
    b: &LinearOperator,
    lambda: f64,
    sampling: Sampling,
    tol: f64,
) -> Result<AdjointAlgebraReport> {
    require_smooth(ctx, "adjoint_algebra_check")?;
    check_operator(ctx, a)?;
    check_operator(ctx, b)?;
    let ab = a.compose(b);
    let la = a.scale(lambda);
    let ys = sample_points(ctx.model(), sampling);
    let rows: Vec<Result<(f64, f64)>> = ys
        .par_iter()
        .map(|y| {
            let lhs = adjoint_raw(ctx, &ab, y)?;
            let at_y = adjoint_raw(ctx, a, y)?;
            let rhs = if at_y.iter().all(|&v| v == 0.0) {
                Vector::zeros(y.len())
            } else {
                adjoint_raw(ctx, b, &at_y)?
            };
            let scaled = adjoint_raw(ctx, &la, y)?;
            Ok((ctx.norm(&(lhs - rhs)), ctx.norm(&(scaled - at_y * lambda))))
        })
        .collect();
    let prod = rows.into_iter().collect::<Result<Vec<(f64, f64)>>>()?;
    let product_residual = prod.iter().map(|r| r.0).fold(0.0, f64::max);
    let scalar_residual = prod.iter().map(|r| r.1).fold(0.0, f64::max);
    let combined: Vec<f64> = prod.iter().map(|r| r.0.max(r.1)).collect();
    let pairs = ys.into_iter().map(|y| (y.clone(), y)).collect();
    let report = reduce_residuals(pairs, &combined, tol);
    Ok(AdjointAlgebraReport {
        report,
        product_residual,
        scalar_residual,
    })
}

/// The Example operator exactly as printed for the ellipse
/// `(x/a)² + (y/b)² = 1`: `diag(1/a, 1/b)·F_φ·diag(a, b)`.
pub fn ellipse_example_operator(a: f64, b: f64, phi: f64) -> LinearOperator {
    let (s, c) = phi.sin_cos();
    LinearOperator(Matrix::from_row_slice(2, 2, &[c, b / a * s, -a / b * s, c]))
}

/// The generalized rotation `F_φ` written in the basis `{a·e, b·f}`, i.e.
/// `diag(a, b)·F_φ·diag(1/a, 1/b)`; this one preserves the ellipse norm.
pub fn ellipse_rotation(a: f64, b: f64, phi: f64) -> LinearOperator {
    let (s, c) = phi.sin_cos();
    LinearOperator(Matrix::from_row_slice(2, 2, &[c, a / b * s, -b / a * s, c]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanBranch {
    /// `sgn(−sin φ) = −1`, i.e. `0 < φ < π/4`.
    #[serde(rename = "negative_sine_sign")]
    One,
    /// `sgn(−sin φ) = +1`, i.e. `−π/4 < φ < 0`.
    #[serde(rename = "positive_sine_sign")]
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p: f64,
    pub phi: f64,
    pub tan_phi: f64,
    pub branch: ScanBranch,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub all_positive: bool,
    pub min_branch_one: Option<f64>,
    pub min_branch_two: Option<f64>,
}

/// `(1+t^p)^{(p−2)/p}(1+t) − 1 + t^{p−1}`.
pub fn rotation_branch_one(p: f64, t: f64) -> f64 {
    (1.0 + t.powf(p)).powf((p - 2.0) / p) * (1.0 + t) - 1.0 + t.powf(p - 1.0)
}

/// `1 + t^{p−1} − (1+t^p)^{(p−2)/p}(1−t)` with `t = |tan φ| < 1`.
pub fn rotation_branch_two(p: f64, t: f64) -> f64 {
    1.0 + t.powf(p - 1.0) - (1.0 + t.powf(p)).powf((p - 2.0) / p) * (1.0 - t)
}

/// Angles `±atan(t)` for each tangent value, the grid form used by the CLI.
pub fn phi_grid_from_tangents(tangents: &[f64]) -> Vec<f64> {
    tangents
        .iter()
        .flat_map(|&t| [t.atan(), -t.atan()])
        .collect()
}

/// Evaluates the two sign functions that rule out generalized rotations
/// being adjoint abelian in planar `l_p`. The branch is chosen by the sign
/// of `sin φ`; admissible angles satisfy `0 < |tan φ| < 1`.
pub fn lp_rotation_scan(p_grid: &[f64], phi_grid: &[f64]) -> Result<ScanTable> {
    if p_grid.is_empty() || phi_grid.is_empty() {
        return Err(Error::input("scan grids must be non-empty"));
    }
    if let Some(p) = p_grid.iter().find(|&&p| !(p > 1.0 && p <= 100.0)) {
        return Err(Error::input(format!("p = {p} outside (1, 100]")));
    }
    if let Some(phi) = phi_grid.iter().find(|&&phi| {
        let t = phi.tan();
        !(t.is_finite() && phi.cos() > 0.0 && t != 0.0 && t.abs() < 1.0)
    }) {
        return Err(Error::input(format!(
            "angle {phi} is not admissible (need cos φ > 0 and 0 < |tan φ| < 1)"
        )));
    }
    let mut rows = Vec::with_capacity(p_grid.len() * phi_grid.len());
    for &p in p_grid {
        for &phi in phi_grid {
            let tan_phi = phi.tan();
            let t = tan_phi.abs();
            let (branch, f) = if phi > 0.0 {
                (ScanBranch::One, rotation_branch_one(p, t))
            } else {
                (ScanBranch::Two, rotation_branch_two(p, t))
            };
            rows.push(ScanRow { p, phi, tan_phi, branch, f });
        }
    }
    let min_of = |b: ScanBranch| {
        rows.iter()
            .filter(|r| r.branch == b)
            .map(|r| r.f)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.min(f))))
    };
    Ok(ScanTable {
        all_positive: rows.iter().all(|r| r.f > 0.0),
        min_branch_one: min_of(ScanBranch::One),
        min_branch_two: min_of(ScanBranch::Two),
        rows,
    })
}
