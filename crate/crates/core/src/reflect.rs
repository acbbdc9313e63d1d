//! Left reflections and their compositions.
//!
//! A left reflection in a line (or hyperplane) `G` is the affine involution
//! that fixes `G` pointwise and reverses the direction Birkhoff-orthogonal to
//! `G`. In a strictly convex space that direction is unique, so the map is
//! determined by `G` alone.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_vector, is_finite_mat, is_finite_vec, null_space, rng, serde_matrix, serde_vector, Matrix, Vector};
use crate::operators::{is_isometry, LinearOperator, Sampling};
use crate::ortho::{birkhoff, birkhoff_direction};
use crate::sip::{Side, SipContext};

const PARALLEL_TOL: f64 = 1e-12;
const CHECK_POINTS: usize = 50;

/// A line or hyperplane given by one of its points and a basis of its direction space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    #[serde(with = "serde_vector")]
    pub point: Vector,
    #[serde(with = "crate::linalg::serde_vectors")]
    pub directions: Vec<Vector>,
}

impl LineSpec {
    pub fn new(point: Vector, directions: Vec<Vector>) -> Result<Self> {
        let n = point.len();
        if directions.is_empty() || directions.len() >= n.max(1) {
            return Err(Error::input(format!(
                "a line or hyperplane in dimension {n} needs between 1 and {} directions",
                n.saturating_sub(1)
            )));
        }
        if directions.iter().any(|d| d.len() != n) || !is_finite_vec(&point) || !directions.iter().all(is_finite_vec) {
            return Err(Error::input("line directions must be finite vectors of the point's dimension"));
        }
        let m = Matrix::from_columns(&directions);
        if m.rank(1e-10 * m.amax().max(1e-300)) < directions.len() {
            return Err(Error::input("line directions are linearly dependent"));
        }
        Ok(LineSpec { point, directions })
    }

    /// Line through `point` with the given direction.
    pub fn line(point: Vector, direction: Vector) -> Result<Self> {
        Self::new(point, vec![direction])
    }

    /// Line through the origin at angle `theta` in the plane.
    pub fn through_origin(theta: f64) -> Self {
        LineSpec {
            point: Vector::zeros(2),
            directions: vec![Vector::from_vec(vec![theta.cos(), theta.sin()])],
        }
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    fn direction_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.directions)
    }

    /// Euclidean distance from `x` to the affine subspace.
    pub fn distance(&self, x: &Vector) -> f64 {
        let h = self.direction_matrix();
        let q = h.clone().qr().q();
        let r = x - &self.point;
        (&r - &q * (q.transpose() * &r)).norm()
    }

    /// Whether two lines share their direction space.
    pub fn is_parallel(&self, other: &LineSpec) -> bool {
        if self.dim() != other.dim() || self.directions.len() != other.directions.len() {
            return false;
        }
        let q = self.direction_matrix().qr().q();
        other.directions.iter().all(|d| {
            let u = d.normalize();
            (&u - &q * (q.transpose() * &u)).norm() <= PARALLEL_TOL
        })
    }
}

/// `x ↦ L x + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(rename = "L", with = "serde_matrix")]
    pub linear: Matrix,
    #[serde(with = "serde_vector")]
    pub t: Vector,
}

impl AffineMap {
    pub fn new(linear: Matrix, t: Vector) -> Result<Self> {
        if linear.nrows() != linear.ncols() || linear.nrows() != t.len() {
            return Err(Error::input("affine map needs a square linear part matching the translation"));
        }
        if !is_finite_mat(&linear) || !is_finite_vec(&t) {
            return Err(Error::input("affine map has non-finite entries"));
        }
        Ok(AffineMap { linear, t })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            linear: Matrix::identity(n, n),
            t: Vector::zeros(n),
        }
    }

    /// The translation `Θ_p`.
    pub fn translation(p: Vector) -> Self {
        let n = p.len();
        AffineMap {
            linear: Matrix::identity(n, n),
            t: p,
        }
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.t
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &next.linear * &self.linear,
            t: &next.linear * &self.t + &next.t,
        }
    }
}

/// Composition applying `maps[0]` first and the last map last.
pub fn compose(maps: &[AffineMap]) -> Result<AffineMap> {
    let first = maps.first().ok_or_else(|| Error::input("compose needs at least one map"))?;
    if maps.iter().any(|m| m.dim() != first.dim()) {
        return Err(Error::input("composed maps differ in dimension"));
    }
    Ok(maps.iter().skip(1).fold(first.clone(), |acc, m| acc.then(m)))
}

fn require_strict(ctx: &SipContext, op: &'static str) -> Result<()> {
    if ctx.model().is_strictly_convex() {
        Ok(())
    } else {
        Err(Error::Unsupported {
            op,
            gate: "classify",
            reason: "left reflections need a unique Birkhoff-orthogonal direction (strict convexity)".into(),
        })
    }
}

/// Reflection fixing the hyperplane through `q` with direction space
/// `ker(nᵀ)` and reversing `d`.
fn reflection_along(d: &Vector, normal: &Vector, q: &Vector) -> AffineMap {
    let n = d.len();
    let linear = Matrix::identity(n, n) - d * normal.transpose() * (2.0 / normal.dot(d));
    let t = q - &linear * q;
    AffineMap { linear, t }
}

/// Max over sample points of the defining-clause residuals: the midpoint of
/// `p` and its image lies on `G`, `p − p′` is Birkhoff orthogonal to every
/// direction of `G`, and applying the map twice returns `p`.
pub fn left_reflection_residual(ctx: &SipContext, map: &AffineMap, g: &LineSpec, seed: u64) -> f64 {
    let n = g.dim();
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..CHECK_POINTS {
        let p = &g.point + gaussian_vector(&mut r, n) * 2.0;
        let image = map.apply(&p);
        let scale = p.norm().max(1.0);
        worst = worst.max(g.distance(&((&p + &image) * 0.5)) / scale);
        worst = worst.max((map.apply(&image) - &p).norm() / scale);
        let diff = &p - &image;
        let nd = ctx.norm(&diff);
        if nd > 1e-12 * scale {
            for h in &g.directions {
                let slope = ctx.rho(&diff, h, Side::Plus).abs().max(ctx.rho(&diff, h, Side::Minus).abs());
                worst = worst.max(slope / (nd * ctx.norm(h)));
            }
        }
    }
    worst
}

/// Left reflection in a line of a strictly convex plane.
pub fn left_reflection(ctx: &SipContext, g: &LineSpec, tol: f64) -> Result<AffineMap> {
    require_strict(ctx, "left_reflection")?;
    if ctx.dim() != 2 || g.dim() != 2 || g.directions.len() != 1 {
        return Err(Error::input("left_reflection needs a line in a plane"));
    }
    let dir = &g.directions[0];
    let d = birkhoff_direction(ctx, dir, tol)?;
    let normal = Vector::from_vec(vec![-dir[1], dir[0]]);
    let map = reflection_along(&d, &normal, &g.point);
    verify(ctx, map, g, tol)
}

fn verify(ctx: &SipContext, map: AffineMap, g: &LineSpec, tol: f64) -> Result<AffineMap> {
    let residual = left_reflection_residual(ctx, &map, g, 0x1ef7);
    if residual > tol.max(1e-9) {
        return Err(Error::numeric("constructed map violates the left-reflection clauses", residual));
    }
    Ok(map)
}

/// Left reflection in a hyperplane of a strictly convex smooth space.
///
/// The reversed direction `d` is the Riesz representer of the hyperplane's
/// Euclidean normal: `[h, d] = 0` for every direction `h` of `G`, which is
/// Birkhoff orthogonality `d ⊥_B G`. This is confirmed by minimizing
/// `‖d + t h‖` along the hyperplane's directions and along random
/// combinations of them.
pub fn left_reflection_hyperplane(ctx: &SipContext, g: &LineSpec, tol: f64) -> Result<AffineMap> {
    require_strict(ctx, "left_reflection_hyperplane")?;
    let n = ctx.dim();
    if n < 3 || g.dim() != n || g.directions.len() != n - 1 {
        return Err(Error::input("left_reflection_hyperplane needs a hyperplane in dimension ≥ 3"));
    }
    let h = g.direction_matrix();
    let normal = null_space(&h.transpose(), 1e-10).column(0).into_owned();
    let d = ctx.riesz_representer(&normal)?;
    let d = &d / ctx.norm(&d);
    let mut probes = g.directions.clone();
    let mut r = rng(0x0b5e);
    for _ in 0..16 {
        probes.push(&h * gaussian_vector(&mut r, n - 1));
    }
    let mut worst = 0.0f64;
    for probe in &probes {
        let check = birkhoff(ctx, &d, probe, 1e-9)?;
        worst = worst.max(check.minimizer_t.abs() * ctx.norm(probe));
    }
    if worst > tol.max(1e-9) {
        return Err(Error::numeric("hyperplane has no Birkhoff-orthogonal direction within tolerance", worst));
    }
    let map = reflection_along(&d, &normal, &g.point);
    verify(ctx, map, g, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    Identity,
    Translation,
    Shear,
    LeftReflection,
    Isometry,
    General,
}

/// The fixed hyperplane of an affine involution with a single reversed
/// direction, if there is one.
pub fn fixed_hyperplane(map: &AffineMap, tol: f64) -> Option<(LineSpec, Vector)> {
    let n = map.dim();
    let id = Matrix::identity(n, n);
    if n < 2 || (&map.linear * &map.linear - &id).amax() > tol {
        return None;
    }
    let plus = null_space(&(&map.linear - &id), tol);
    let minus = null_space(&(&map.linear + &id), tol);
    if plus.ncols() != n - 1 || minus.ncols() != 1 {
        return None;
    }
    // fixed points solve (I − L) x = t, whose range is span(d)
    let d = minus.column(0).into_owned();
    let a = &id - &map.linear;
    let q = a.clone().svd(true, true).solve(&map.t, 1e-12).ok()?;
    if (&a * &q - &map.t).norm() > tol * map.t.norm().max(1.0) {
        return None;
    }
    let dirs = (0..n - 1).map(|k| plus.column(k).into_owned()).collect();
    Some((LineSpec { point: q, directions: dirs }, d))
}

/// First matching label among identity, translation, shear,
/// left-reflection, isometry, general.
pub fn classify_composition(ctx: &SipContext, map: &AffineMap, tol: f64) -> Result<Composition> {
    ctx.model().check_dim(&map.t)?;
    let n = map.dim();
    let id = Matrix::identity(n, n);
    let scale = map.linear.amax().max(1.0);
    if (&map.linear - &id).amax() <= tol * scale {
        return Ok(if map.t.amax() <= tol {
            Composition::Identity
        } else {
            Composition::Translation
        });
    }
    let e = &map.linear - &id;
    if (&e * &e).amax() <= tol * scale * scale {
        return Ok(Composition::Shear);
    }
    if ctx.model().is_strictly_convex() {
        if let Some((g, _)) = fixed_hyperplane(map, tol.max(1e-9)) {
            if left_reflection_residual(ctx, map, &g, 0x1ef7) <= tol.max(1e-9) {
                return Ok(Composition::LeftReflection);
            }
        }
    }
    let linear = LinearOperator::new(map.linear.clone())?;
    if is_isometry(ctx, &linear, Sampling::new(200, 0), tol.max(1e-9))?.verdict {
        return Ok(Composition::Isometry);
    }
    Ok(Composition::General)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub worst_defect: f64,
    /// Line angles (through the origin) of the worst trial.
    pub witness_angles: Vec<f64>,
}

impl CriterionReport {
    fn new(name: &str) -> Self {
        CriterionReport {
            name: name.into(),
            trials: 0,
            passed: 0,
            pass_rate: 1.0,
            worst_defect: 0.0,
            witness_angles: Vec::new(),
        }
    }

    fn record(&mut self, defect: f64, tol: f64, angles: &[f64]) {
        self.trials += 1;
        let defect = if defect.is_nan() { f64::INFINITY } else { defect };
        if defect <= tol {
            self.passed += 1;
        }
        if defect > self.worst_defect || self.witness_angles.is_empty() {
            self.worst_defect = self.worst_defect.max(defect);
            self.witness_angles = angles.to_vec();
        }
        self.pass_rate = self.passed as f64 / self.trials as f64;
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub two_reflection_isometry: CriterionReport,
    pub james_preservation: CriterionReport,
    pub circle_image: CriterionReport,
    pub three_reflections: CriterionReport,
}

impl BatteryReport {
    pub fn criteria(&self) -> [&CriterionReport; 4] {
        [
            &self.two_reflection_isometry,
            &self.james_preservation,
            &self.circle_image,
            &self.three_reflections,
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.criteria().iter().all(|c| c.all_passed())
    }
}

const CIRCLE_SAMPLES: usize = 256;
const DISK_POINTS: usize = 64;
const G4_GRID: usize = 2048;

fn unit_circle(ctx: &SipContext, m: usize) -> Vec<Vector> {
    (0..m)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            let v = Vector::from_vec(vec![t.cos(), t.sin()]);
            let nv = ctx.norm(&v);
            v / nv
        })
        .collect()
}

fn reflection_matrix(ctx: &SipContext, theta: f64, tol: f64) -> Result<Matrix> {
    Ok(left_reflection(ctx, &LineSpec::through_origin(theta), tol)?.linear)
}

/// Unit `y` with `‖x+y‖ = ‖x−y‖`, found by bisection on the half-turn from `x`.
fn james_partner(ctx: &SipContext, x: &Vector) -> Vector {
    let tx = x[1].atan2(x[0]);
    let dir = |t: f64| Vector::from_vec(vec![t.cos(), t.sin()]);
    let f = |t: f64| {
        let y = dir(t);
        let y = &y / ctx.norm(&y);
        ctx.norm(&(x + &y)) - ctx.norm(&(x - &y))
    };
    let t = crate::linalg::bisect_root(f, tx, tx + std::f64::consts::PI, 200);
    let y = dir(t);
    &y / ctx.norm(&y)
}

/// Sampled evidence for the characterizations of Euclidean planes among
/// strictly convex planes through left reflections.
///
/// (a) products of two left reflections are isometries; (b) left
/// reflections preserve James orthogonality; (c) left reflections map the
/// unit circle to a circle; (d) a product of three reflections in
/// concurrent lines is again a left reflection in a line through the common
/// point.
pub fn euclidean_battery(ctx: &SipContext, trials: usize, tol: f64) -> Result<BatteryReport> {
    require_strict(ctx, "euclidean_battery")?;
    if ctx.dim() != 2 {
        return Err(Error::input("euclidean_battery needs a plane"));
    }
    let pi = std::f64::consts::PI;
    let mut r = rng(0xba77);
    let circle = unit_circle(ctx, CIRCLE_SAMPLES);
    let disk: Vec<Vector> = (0..DISK_POINTS)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / DISK_POINTS as f64;
            let rad = 0.25 + 0.75 * ((k * 7) % DISK_POINTS) as f64 / DISK_POINTS as f64;
            Vector::from_vec(vec![rad * t.cos(), rad * t.sin()])
        })
        .collect();
    let mut a = CriterionReport::new("two_reflection_isometry");
    let mut b = CriterionReport::new("james_preservation");
    let mut c = CriterionReport::new("circle_image");
    let mut d = CriterionReport::new("three_reflections");

    // G4 candidates are shared by all trials of criterion (d)
    let candidates: Vec<Matrix> = (0..G4_GRID)
        .map(|k| reflection_matrix(ctx, pi * k as f64 / G4_GRID as f64, tol))
        .collect::<Result<_>>()?;
    let sup_diff = |m: &Matrix, cand: &Matrix| {
        disk.iter()
            .map(|x| ctx.norm(&(m * x - cand * x)))
            .fold(0.0f64, f64::max)
    };

    for _ in 0..trials {
        let t1: f64 = r.random_range(0.0..pi);
        let t2: f64 = r.random_range(0.0..pi);
        let t3: f64 = r.random_range(0.0..pi);
        let l1 = reflection_matrix(ctx, t1, tol)?;
        let l2 = reflection_matrix(ctx, t2, tol)?;
        let l3 = reflection_matrix(ctx, t3, tol)?;

        let prod = &l2 * &l1;
        let iso = circle.iter().map(|x| (ctx.norm(&(&prod * x)) - 1.0).abs()).fold(0.0f64, f64::max);
        a.record(iso, tol, &[t1, t2]);

        let x = &circle[r.random_range(0..CIRCLE_SAMPLES)];
        let y = james_partner(ctx, x);
        let (lx, ly) = (&l1 * x, &l1 * &y);
        let james = (ctx.norm(&(&lx + &ly)) - ctx.norm(&(&lx - &ly))).abs();
        b.record(james, tol, &[t1]);

        let radii: Vec<f64> = circle.iter().map(|x| ctx.norm(&(&l1 * x))).collect();
        let fit = radii.iter().sum::<f64>() / radii.len() as f64;
        let circ = radii.iter().map(|r| (r - fit).abs()).fold(0.0f64, f64::max);
        c.record(circ, tol, &[t1]);

        let m = &l3 * &l2 * &l1;
        let (k, _) = candidates
            .iter()
            .enumerate()
            .map(|(k, cand)| (k, sup_diff(&m, cand)))
            .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
        let step = pi / G4_GRID as f64;
        let f = |theta: f64| match reflection_matrix(ctx, theta, tol) {
            Ok(cand) => sup_diff(&m, &cand),
            Err(_) => f64::INFINITY,
        };
        let centre = k as f64 * step;
        let (theta4, best) = crate::linalg::golden_section(f, centre - step, centre + step, 80);
        let best = best.min(sup_diff(&m, &candidates[k]));
        d.record(best, tol, &[t1, t2, t3, theta4]);
    }
    Ok(BatteryReport {
        two_reflection_isometry: a,
        james_preservation: b,
        circle_image: c,
        three_reflections: d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub preserved: usize,
    pub rate: f64,
    pub worst_residual: f64,
    /// `(line angle, x, y)` of the worst trial.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<(f64, Vec<f64>, Vec<f64>)>,
}

/// Fraction of sampled pairs `x ⊥_B y` whose images under sampled left
/// reflections stay Birkhoff orthogonal.
pub fn birkhoff_preservation_probe(ctx: &SipContext, trials: usize, tol: f64) -> Result<ProbeReport> {
    require_strict(ctx, "birkhoff_preservation_probe")?;
    if ctx.dim() != 2 {
        return Err(Error::input("birkhoff_preservation_probe needs a plane"));
    }
    let mut r = rng(0xb1f0);
    let mut report = ProbeReport {
        trials,
        preserved: 0,
        rate: 1.0,
        worst_residual: 0.0,
        counterexample: None,
    };
    for _ in 0..trials {
        let theta: f64 = r.random_range(0.0..std::f64::consts::PI);
        let phi: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let y = Vector::from_vec(vec![phi.cos(), phi.sin()]);
        let x = birkhoff_direction(ctx, &y, tol)?;
        let l = reflection_matrix(ctx, theta, tol)?;
        let (lx, ly) = (&l * &x, &l * &y);
        let slope = ctx.rho(&lx, &ly, Side::Plus).abs() / (ctx.norm(&lx) * ctx.norm(&ly));
        if slope <= tol {
            report.preserved += 1;
        }
        if slope > report.worst_residual || report.counterexample.is_none() && slope > tol {
            report.worst_residual = report.worst_residual.max(slope);
            if slope > tol {
                report.counterexample = Some((theta, x.as_slice().to_vec(), y.as_slice().to_vec()));
            }
        }
    }
    report.rate = if trials == 0 { 1.0 } else { report.preserved as f64 / trials as f64 };
    Ok(report)
}
