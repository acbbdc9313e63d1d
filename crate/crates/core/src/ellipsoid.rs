//! Löwner (minimum-volume enclosing) and John (maximum-volume inscribed)
//! ellipsoids of centrally symmetric convex bodies.
//!
//! Enclosing ellipsoids come from Khachiyan's barycentric ascent with the
//! Todd–Yildirim away steps. The inscribed ellipsoid of a symmetric body is
//! the polar of the enclosing ellipsoid of its polar body.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_finite_vec, serde_matrix, serde_vector, Matrix, Vector};
use crate::normspace::NormModel;

pub const DEFAULT_EPS: f64 = 1e-6;
pub const MAX_ITERS: usize = 100_000;
pub const SMOOTH_SAMPLES: usize = 4096;
/// Angular radius (radians) within which contact samples are merged.
pub const CONTACT_CLUSTER_ANGLE: f64 = 1e-3;

/// `{x : (x−c)ᵀ S (x−c) ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    #[serde(with = "serde_vector")]
    pub center: Vector,
    #[serde(rename = "S", with = "serde_matrix")]
    pub shape: Matrix,
}

impl Ellipsoid {
    pub fn new(center: Vector, shape: Matrix) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::input("ellipsoid shape must be n×n for an n-vector center"));
        }
        if (&shape - shape.transpose()).amax() > 1e-9 * shape.amax().max(1.0) {
            return Err(Error::input("ellipsoid shape matrix is not symmetric"));
        }
        if shape.clone().cholesky().is_none() {
            return Err(Error::input("ellipsoid shape matrix is not positive definite"));
        }
        Ok(Ellipsoid { center, shape })
    }

    pub fn centered(shape: Matrix) -> Result<Self> {
        let n = shape.nrows();
        Self::new(Vector::zeros(n), shape)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `sqrt((x−c)ᵀ S (x−c))`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        let r = x - &self.center;
        r.dot(&(&self.shape * &r)).max(0.0).sqrt()
    }

    /// Polar body of a centered ellipsoid: shape `S⁻¹`.
    pub fn polar(&self) -> Result<Ellipsoid> {
        if self.center.amax() > 1e-9 {
            return Err(Error::Precondition("polar is taken of a centered ellipsoid".into()));
        }
        let inv = self
            .shape
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numeric("ellipsoid shape is singular", f64::INFINITY))?;
        Ok(Ellipsoid {
            center: Vector::zeros(self.dim()),
            shape: symmetrize(inv),
        })
    }

    /// Image under `x ↦ A x + b`.
    pub fn transform(&self, a: &Matrix, b: &Vector) -> Result<Ellipsoid> {
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("ellipsoid is mapped by a singular matrix"))?;
        Ok(Ellipsoid {
            center: a * &self.center + b,
            shape: symmetrize(inv.transpose() * &self.shape * inv),
        })
    }

    /// Volume relative to the unit ball: `det(S)^{-1/2}`.
    pub fn relative_volume(&self) -> f64 {
        self.shape.determinant().powf(-0.5)
    }

    /// Semi-axis lengths, ascending.
    pub fn semi_axes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .shape
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.powf(-0.5))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

fn is_symmetric_cloud(points: &[Vector]) -> bool {
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1e-300);
    points
        .iter()
        .all(|p| points.iter().any(|q| (p + q).amax() <= 1e-9 * scale))
}

/// Minimum-volume enclosing ellipsoid of a point cloud.
///
/// Symmetric clouds get an exactly centered ellipsoid. The result is scaled
/// so that every input point lies inside; its volume is within `(1+eps)^n`
/// of the optimum.
pub fn lowner(points: &[Vector], eps: f64) -> Result<Ellipsoid> {
    let first = points.first().ok_or_else(|| Error::input("empty point cloud"))?;
    let n = first.len();
    if n == 0 || points.iter().any(|p| p.len() != n || !is_finite_vec(p)) {
        return Err(Error::input("points must be finite vectors of one positive dimension"));
    }
    if !(eps > 0.0) {
        return Err(Error::input("eps must be positive"));
    }
    let cloud = Matrix::from_columns(points);
    let spread = cloud.amax().max(1e-300);
    let symmetric = is_symmetric_cloud(points);
    let lifted: Vec<Vector> = if symmetric {
        points.to_vec()
    } else {
        points.iter().map(|p| p.clone().insert_row(n, 1.0)).collect()
    };
    let q = Matrix::from_columns(&lifted);
    if q.rank(1e-10 * spread) < q.nrows() {
        return Err(Error::input("point cloud does not span the space"));
    }
    let weights = khachiyan(&q, eps)?;
    let ellipsoid = if symmetric {
        let x = &q * Matrix::from_diagonal(&weights) * q.transpose();
        let s = x
            .try_inverse()
            .ok_or_else(|| Error::numeric("moment matrix is singular", f64::INFINITY))?
            / n as f64;
        Ellipsoid {
            center: Vector::zeros(n),
            shape: symmetrize(s),
        }
    } else {
        let center = &cloud * &weights;
        let second = &cloud * Matrix::from_diagonal(&weights) * cloud.transpose() - &center * center.transpose();
        let s = second
            .try_inverse()
            .ok_or_else(|| Error::numeric("moment matrix is singular", f64::INFINITY))?
            / n as f64;
        Ellipsoid {
            center,
            shape: symmetrize(s),
        }
    };
    let worst = points.iter().map(|p| ellipsoid.gauge(p)).fold(0.0, f64::max);
    let shape = if worst > 1.0 {
        &ellipsoid.shape / (worst * worst)
    } else {
        ellipsoid.shape
    };
    Ok(Ellipsoid {
        center: ellipsoid.center,
        shape,
    })
}

/// Weights of the optimal design on the columns of `q` (d×m), with
/// Todd–Yildirim away steps. Leverages `q_iᵀ X⁻¹ q_i` are updated by
/// Sherman–Morrison after each rank-one step and recomputed periodically.
fn khachiyan(q: &Matrix, eps: f64) -> Result<Vector> {
    let d = q.nrows() as f64;
    let m = q.ncols();
    let mut u = Vector::from_element(m, 1.0 / m as f64);
    let mut xinv = Matrix::zeros(q.nrows(), q.nrows());
    let mut lev = vec![0.0; m];
    let mut last = f64::INFINITY;
    for iter in 0..MAX_ITERS {
        if iter % 200 == 0 {
            let mut scaled = q.clone();
            for (k, mut col) in scaled.column_iter_mut().enumerate() {
                col *= u[k];
            }
            xinv = (scaled * q.transpose())
                .try_inverse()
                .ok_or_else(|| Error::numeric("design matrix is singular", f64::NAN))?;
            let solved = &xinv * q;
            for (k, l) in lev.iter_mut().enumerate() {
                *l = q.column(k).dot(&solved.column(k));
            }
        }
        let (j, kmax) = lev
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, v)| if v > a.1 { (i, v) } else { a });
        let (i, kmin) = lev
            .iter()
            .copied()
            .enumerate()
            .filter(|&(i, _)| u[i] > 0.0)
            .fold((0, f64::MAX), |a, (i, v)| if v < a.1 { (i, v) } else { a });
        let up = kmax / d - 1.0;
        let down = 1.0 - kmin / d;
        last = up.max(down);
        if up <= eps && down <= eps {
            return Ok(u);
        }
        // X ← a·X + b·q_k q_kᵀ
        let (k, a, b) = if up > down {
            let beta = (kmax - d) / (d * (kmax - 1.0));
            u *= 1.0 - beta;
            u[j] += beta;
            (j, 1.0 - beta, beta)
        } else {
            let beta = ((d - kmin) / (d * (kmin - 1.0))).min(u[i] / (1.0 - u[i]));
            u *= 1.0 + beta;
            u[i] -= beta;
            if u[i] < 1e-300 {
                u[i] = 0.0;
            }
            (i, 1.0 + beta, -beta)
        };
        let w = &xinv * q.column(k);
        let r = b / a;
        let denom = 1.0 + r * lev[k];
        let g = q.transpose() * &w;
        for (idx, l) in lev.iter_mut().enumerate() {
            *l = (*l - r * g[idx] * g[idx] / denom) / a;
        }
        xinv = (&xinv - &w * w.transpose() * (r / denom)) / a;
    }
    Err(Error::numeric("Khachiyan iteration did not converge", last))
}

/// A centrally symmetric convex body known through its support function.
pub trait ConvexBody {
    fn dim(&self) -> usize;

    /// `h(u) = max{u·x : x ∈ body}`.
    fn support(&self, u: &Vector) -> f64;

    /// Points on the boundary of the body.
    fn boundary_samples(&self, m: usize) -> Vec<Vector>;

    /// Points on the boundary of the polar body, `u / h(u)`.
    fn polar_samples(&self, m: usize) -> Vec<Vector> {
        direction_grid(self.dim(), m)
            .into_iter()
            .map(|u| {
                let h = self.support(&u);
                u / h
            })
            .collect()
    }

    /// Boundary points worth testing for contact with `e`.
    fn contact_candidates(&self, _e: &Ellipsoid, m: usize) -> Vec<Vector> {
        self.boundary_samples(m)
    }

    /// Whether no 2-D section is an ellipse, when that is known.
    fn ellipse_free_sections(&self) -> Option<bool> {
        None
    }
}

/// Deterministic unit directions: equally spaced in the plane, a
/// latitude–longitude grid in 3-D, normalized Gaussians beyond.
pub fn direction_grid(n: usize, m: usize) -> Vec<Vector> {
    match n {
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..m)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / m as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => sphere_grid(m),
        _ => {
            let mut r = crate::linalg::rng(0x9e0d);
            let mut out = Vec::with_capacity(2 * m);
            for _ in 0..m.div_ceil(2) {
                let g = crate::linalg::gaussian_vector(&mut r, n).normalize();
                out.push(-&g);
                out.push(g);
            }
            out
        }
    }
}

/// Latitude rings of equal longitude count plus both poles, symmetric under `x ↦ −x`.
fn sphere_grid(m: usize) -> Vec<Vector> {
    let longitudes = (((2 * m) as f64).sqrt().round() as usize).max(8) & !1;
    let rings = (m.saturating_sub(2) / longitudes).max(1);
    let mut out = vec![Vector::from_vec(vec![0.0, 0.0, 1.0]), Vector::from_vec(vec![0.0, 0.0, -1.0])];
    for r in 0..rings {
        let polar = std::f64::consts::PI * (r as f64 + 0.5) / rings as f64;
        let (s, c) = polar.sin_cos();
        for k in 0..longitudes {
            let t = std::f64::consts::TAU * k as f64 / longitudes as f64;
            out.push(Vector::from_vec(vec![s * t.cos(), s * t.sin(), c]));
        }
    }
    out
}

impl ConvexBody for NormModel {
    fn dim(&self) -> usize {
        NormModel::dim(self)
    }

    fn support(&self, u: &Vector) -> f64 {
        NormModel::support(self, u)
    }

    fn boundary_samples(&self, m: usize) -> Vec<Vector> {
        direction_grid(self.dim(), m)
            .into_iter()
            .map(|u| {
                let r = self.eval(&u);
                u / r
            })
            .collect()
    }

    fn polar_samples(&self, m: usize) -> Vec<Vector> {
        match self {
            NormModel::Polytopal(p) => p.facet_normals().to_vec(),
            _ => direction_grid(self.dim(), m)
                .into_iter()
                .map(|u| {
                    let h = NormModel::support(self, &u);
                    u / h
                })
                .collect(),
        }
    }

    /// Adds, for polytopes, the point where each facet's direction is
    /// tangent to `e`; it is a contact exactly when it lies on the facet.
    fn contact_candidates(&self, e: &Ellipsoid, m: usize) -> Vec<Vector> {
        let mut pts = self.boundary_samples(m);
        if let (NormModel::Polytopal(p), Some(inv)) = (self, e.shape.clone().try_inverse()) {
            for a in p.facet_normals() {
                let w = &inv * a;
                let x = &e.center + &w / a.dot(&w).sqrt();
                let r = self.eval(&x);
                if r > 0.0 {
                    pts.push(x / r);
                }
            }
        }
        pts
    }

    fn ellipse_free_sections(&self) -> Option<bool> {
        match self {
            NormModel::Polytopal(_) => Some(true),
            NormModel::Quadratic(_) => Some(false),
            NormModel::Lp(l) if l.p() == 2.0 => Some(false),
            NormModel::Lp(_) => None,
        }
    }
}

/// Maximum-volume inscribed ellipsoid of a symmetric body, as the polar of
/// the Löwner ellipsoid of polar-body samples (exact facet normals for
/// polytopes, `SMOOTH_SAMPLES` support samples otherwise).
pub fn john<B: ConvexBody + ?Sized>(body: &B, eps: f64) -> Result<Ellipsoid> {
    let mut samples = body.polar_samples(SMOOTH_SAMPLES);
    if !is_symmetric_cloud(&samples) {
        let negated: Vec<Vector> = samples.iter().map(|s| -s).collect();
        samples.extend(negated);
    }
    let outer = lowner(&samples, eps).map_err(|e| match e {
        Error::Input(msg) => Error::numeric(format!("polar samples are degenerate: {msg}"), f64::NAN),
        other => other,
    })?;
    outer.polar()
}

/// Smallest ellipsoid gauge over body boundary samples; values below 1
/// measure how far a candidate inscribed ellipsoid pokes out.
pub fn inscribed_margin<B: ConvexBody + ?Sized>(body: &B, e: &Ellipsoid, m: usize) -> f64 {
    body.boundary_samples(m)
        .iter()
        .map(|x| e.gauge(x))
        .fold(f64::INFINITY, f64::min)
}

/// Boundary samples where the body touches the ellipsoid, merged within
/// [`CONTACT_CLUSTER_ANGLE`] and closed under `x ↦ −x`.
pub fn contact_points<B: ConvexBody + ?Sized>(body: &B, e: &Ellipsoid, m: usize, tol: f64) -> Vec<Vector> {
    let mut reps: Vec<Vector> = Vec::new();
    let near = |a: &Vector, b: &Vector| {
        let c = a.dot(b) / (a.norm() * b.norm());
        c.clamp(-1.0, 1.0).acos() <= CONTACT_CLUSTER_ANGLE
    };
    for x in body.contact_candidates(e, m) {
        if (e.gauge(&x) - 1.0).abs() > tol {
            continue;
        }
        for y in [x.clone(), -x] {
            if !reps.iter().any(|r| near(r, &y)) {
                reps.push(y);
            }
        }
    }
    reps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoplanarGroup {
    #[serde(with = "serde_vector")]
    pub normal: Vector,
    pub offset: f64,
    pub count: usize,
}

/// Largest set of points sharing a plane `normal·x = offset`. Candidate
/// normals are the principal axes of `e` and of the points' scatter matrix;
/// the latter matter when `e` is close to a ball and its axes are arbitrary.
pub fn largest_coplanar_group(points: &[Vector], e: &Ellipsoid, tol: f64) -> Option<CoplanarGroup> {
    let n = e.dim();
    let scatter = points.iter().fold(Matrix::zeros(n, n), |acc, p| acc + p * p.transpose());
    let mut normals: Vec<Vector> = Vec::new();
    for m in [e.shape.clone(), scatter] {
        let axes = m.symmetric_eigen().eigenvectors;
        normals.extend(axes.column_iter().map(|c| c.into_owned()));
    }
    let mut best: Option<CoplanarGroup> = None;
    for normal in normals {
        let mut offsets: Vec<f64> = points.iter().map(|p| normal.dot(p)).collect();
        offsets.sort_by(f64::total_cmp);
        let mut start = 0;
        while start < offsets.len() {
            let mut end = start;
            while end + 1 < offsets.len() && offsets[end + 1] - offsets[start] <= tol {
                end += 1;
            }
            let count = end - start + 1;
            if best.as_ref().is_none_or(|b| count > b.count) {
                best = Some(CoplanarGroup {
                    normal: normal.clone(),
                    offset: offsets[start..=end].iter().sum::<f64>() / count as f64,
                    count,
                });
            }
            start = end + 1;
        }
    }
    best
}

/// `conv(B ∪ H)` in 3-D: the Euclidean unit ball together with the regular
/// `2n`-gon `H` circumscribed about the circle of radius `1+eps` in the
/// `xy`-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RemarkBody {
    n: usize,
    eps: f64,
    vertices: Vec<Vector>,
}

impl RemarkBody {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::input("the polygon needs n ≥ 3 (2n ≥ 6 vertices)"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::input("eps must be positive"));
        }
        let k = 2 * n;
        let radius = (1.0 + eps) / (std::f64::consts::PI / k as f64).cos();
        let vertices = (0..k)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / k as f64;
                Vector::from_vec(vec![radius * t.cos(), radius * t.sin(), 0.0])
            })
            .collect();
        Ok(RemarkBody { n, eps, vertices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn polygon_vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// The exposed point in direction `u`.
    pub fn support_point(&self, u: &Vector) -> Vector {
        let u = u.normalize();
        let (k, h) = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.dot(&u)))
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        if h > 1.0 {
            self.vertices[k].clone()
        } else {
            u
        }
    }
}

impl ConvexBody for RemarkBody {
    fn dim(&self) -> usize {
        3
    }

    fn support(&self, u: &Vector) -> f64 {
        let h = self.vertices.iter().map(|v| v.dot(u)).fold(f64::MIN, f64::max);
        u.norm().max(h)
    }

    fn boundary_samples(&self, m: usize) -> Vec<Vector> {
        let mut out: Vec<Vector> = Vec::with_capacity(m);
        for u in sphere_grid(m) {
            let p = self.support_point(&u);
            if !out.iter().any(|q| (q - &p).amax() <= 1e-12) {
                out.push(p);
            }
        }
        out
    }

    fn ellipse_free_sections(&self) -> Option<bool> {
        // horizontal sections near the poles are circles
        Some(false)
    }
}

/// Boundary samples of the remark body `conv(B ∪ H(2n, eps))`.
pub fn remark_body_samples(n: usize, eps: f64, m: usize) -> Result<Vec<Vector>> {
    if m < 100 {
        return Err(Error::input("at least 100 samples are needed"));
    }
    Ok(RemarkBody::new(n, eps)?.boundary_samples(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, gaussian_vector, rng};
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    fn ellipse_points(a: f64, b: f64, m: usize) -> Vec<Vector> {
        (0..m)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / m as f64;
                dvector![a * t.cos(), b * t.sin()]
            })
            .collect()
    }

    #[test]
    fn lowner_examples() {
        let square: Vec<Vector> = NormModel::named_polytope("square").unwrap().polar_samples(0);
        let sq_vertices = vec![dvector![1.0, 1.0], dvector![-1.0, 1.0], dvector![1.0, -1.0], dvector![-1.0, -1.0]];
        let e = lowner(&sq_vertices, 1e-9).unwrap();
        assert!((e.shape - Matrix::identity(2, 2) * 0.5).amax() < 1e-8);
        assert_eq!(e.center, Vector::zeros(2));
        assert_eq!(square.len(), 4);

        let e = lowner(&ellipse_points(2.0, 1.0, 200), 1e-9).unwrap();
        assert!((e.shape - dmatrix![0.25, 0.0; 0.0, 1.0]).amax() < 1e-8);

        let hex = match NormModel::named_polytope("hexagon").unwrap() {
            NormModel::Polytopal(p) => p.vertices().to_vec(),
            _ => unreachable!(),
        };
        let e = lowner(&hex, 1e-9).unwrap();
        let r = hex[0].norm();
        assert!((e.shape - Matrix::identity(2, 2) / (r * r)).amax() < 1e-8);
    }

    #[test]
    fn lowner_off_center() {
        let pts: Vec<Vector> = ellipse_points(2.0, 1.0, 120).into_iter().map(|p| p + dvector![3.0, -1.0]).collect();
        let e = lowner(&pts, 1e-9).unwrap();
        assert!((&e.center - dvector![3.0, -1.0]).amax() < 1e-6);
        assert!((e.shape - dmatrix![0.25, 0.0; 0.0, 1.0]).amax() < 1e-6);
        assert!(lowner(&[dvector![1.0, 0.0], dvector![-1.0, 0.0]], 1e-6).is_err());
        assert!(lowner(&[], 1e-6).is_err());
    }

    #[test]
    fn john_examples() {
        let e = john(&NormModel::named_polytope("square").unwrap(), 1e-9).unwrap();
        assert!((e.shape - Matrix::identity(2, 2)).amax() < 1e-8);
        let cross = NormModel::named_polytope("cross3").unwrap();
        let e = john(&cross, 1e-9).unwrap();
        assert!((&e.shape - Matrix::identity(3, 3) * 3.0).amax() < 1e-7);
        // the inscribed ball touches the facet plane x+y+z = 1
        let touch = dvector![1.0, 1.0, 1.0] / 3.0;
        assert!((e.gauge(&touch) - 1.0).abs() < 1e-7);
        let g = dmatrix![2.0, 0.4; 0.4, 1.0];
        let e = john(&NormModel::quadratic(g.clone()).unwrap(), 1e-9).unwrap();
        assert!((e.shape - g).amax() < 1e-7);
    }

    #[test]
    fn john_is_polar_of_lowner_of_cube() {
        let cube = match NormModel::named_polytope("cube3").unwrap() {
            NormModel::Polytopal(p) => p.vertices().to_vec(),
            _ => unreachable!(),
        };
        let via_cube = lowner(&cube, 1e-9).unwrap().polar().unwrap();
        let direct = john(&NormModel::named_polytope("cross3").unwrap(), 1e-9).unwrap();
        assert!((via_cube.shape - direct.shape).amax() < 1e-7);
    }

    #[test]
    fn john_is_inscribed() {
        for model in [NormModel::lp(3.0, 2).unwrap(), NormModel::lp(1.5, 2).unwrap(), NormModel::named_polytope("hexagon").unwrap()] {
            let e = john(&model, 1e-7).unwrap();
            assert!(inscribed_margin(&model, &e, 2000) >= 1.0 - 1e-5);
        }
    }

    #[test]
    fn contacts() {
        let sq = NormModel::named_polytope("square").unwrap();
        let disk = Ellipsoid::centered(Matrix::identity(2, 2)).unwrap();
        let mut c = contact_points(&sq, &disk, 720, 1e-9);
        c.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(c.len(), 4);
        for (p, q) in c.iter().zip([dvector![-1.0, 0.0], dvector![0.0, -1.0], dvector![0.0, 1.0], dvector![1.0, 0.0]]) {
            assert!((p - q).amax() < 1e-12);
        }
        let g = dmatrix![2.0, 0.4; 0.4, 1.0];
        let q = NormModel::quadratic(g.clone()).unwrap();
        let c = contact_points(&q, &Ellipsoid::centered(g).unwrap(), 720, 1e-9);
        assert_eq!(c.len(), 720);
    }

    #[test]
    fn remark_body_construction() {
        let body = RemarkBody::new(16, 0.05).unwrap();
        let samples = body.boundary_samples(2000);
        let mut r = rng(3);
        let probes: Vec<Vector> = (0..400).map(|_| gaussian_vector(&mut r, 3)).collect();
        for x in &samples {
            // inside: no probe direction separates it
            assert!(probes.iter().all(|u| u.dot(x) <= body.support(u) + 1e-9));
            // on the boundary: some direction supports it
            let u = if x.norm() <= 1.0 + 1e-12 { x.clone() } else { x.normalize() };
            assert!((u.dot(x) - body.support(&u)).abs() <= 1e-9 * u.norm());
        }
        assert!(remark_body_samples(16, 0.05, 50).is_err());
        assert!(RemarkBody::new(2, 0.05).is_err());
    }

    #[test]
    fn remark_body_john() {
        let small = RemarkBody::new(16, 0.05).unwrap();
        let e = john(&small, 1e-7).unwrap();
        assert!((e.shape.clone() - Matrix::identity(3, 3)).amax() < 0.01, "{}", e.shape);
        let contacts = contact_points(&small, &e, 4096, 1e-3);
        let group = largest_coplanar_group(&contacts, &e, 1e-6).unwrap();
        assert!(group.count >= 64, "{group:?}");
        let large = RemarkBody::new(16, 10.0).unwrap();
        let e = john(&large, 1e-7).unwrap();
        let axes = e.semi_axes();
        assert!(axes[2] > 1.5 && (axes[1] - axes[2]).abs() < 0.05 * axes[2], "{axes:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn affine_equivariance(seed in 0u64..10_000) {
            let mut r = rng(seed);
            let a = gaussian_matrix(&mut r, 2) + Matrix::identity(2, 2) * 2.5;
            let b = gaussian_vector(&mut r, 2);
            let pts: Vec<Vector> = (0..40).map(|_| gaussian_vector(&mut r, 2)).collect();
            let mapped: Vec<Vector> = pts.iter().map(|p| &a * p + &b).collect();
            let e = lowner(&pts, 1e-9).unwrap().transform(&a, &b).unwrap();
            let f = lowner(&mapped, 1e-9).unwrap();
            prop_assert!((e.shape - &f.shape).amax() <= 1e-5 * f.shape.amax());
            prop_assert!((e.center - &f.center).amax() <= 1e-5);
            prop_assert!(mapped.iter().all(|p| f.gauge(p) <= 1.0 + 1e-9));
        }
    }
}
