//! Norm models of a finite-dimensional real space.
//!
//! Three concrete families are supported: `l_p` norms, quadratic norms
//! `sqrt(xᵀGx)` and polytopal norms whose unit ball is the convex hull of a
//! centrally symmetric vertex set. Every model is an immutable value once
//! constructed; constructors validate the invariants of each family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_vector, is_finite_mat, is_finite_vec, matrix_from_rows, matrix_to_rows, rng, Matrix, Vector};

pub const P_MIN: f64 = 1.01;
pub const P_MAX: f64 = 100.0;

const VERTEX_MATCH_TOL: f64 = 1e-9;
const FACET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceClassification {
    pub smooth: bool,
    pub strictly_convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpNorm {
    p: f64,
    dim: usize,
}

impl LpNorm {
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn eval(&self, x: &Vector) -> f64 {
        lp_norm(x.as_slice(), self.p)
    }
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticNorm {
    g: Matrix,
    g_inv: Matrix,
}

impl QuadraticNorm {
    pub fn gram(&self) -> &Matrix {
        &self.g
    }

    pub fn gram_inverse(&self) -> &Matrix {
        &self.g_inv
    }

    fn eval(&self, x: &Vector) -> f64 {
        x.dot(&(&self.g * x)).max(0.0).sqrt()
    }
}

/// Centrally symmetric polytope given by its vertices, with the facet
/// inequalities `a·x <= 1` computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
    facets: Vec<Vector>,
}

impl Polytope {
    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Outer facet normals scaled so the facet plane is `a·x = 1`.
    /// These are exactly the vertices of the polar polytope.
    pub fn facet_normals(&self) -> &[Vector] {
        &self.facets
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.facets
            .iter()
            .map(|a| a.dot(x))
            .fold(0.0f64, f64::max)
    }

    /// Facets attaining the gauge at `x` within `tol` (relative to the gauge).
    pub fn active_facets(&self, x: &Vector, tol: f64) -> Vec<&Vector> {
        let g = self.eval(x);
        self.facets
            .iter()
            .filter(|a| a.dot(x) >= g - tol * g.max(1e-300))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormModel {
    Lp(LpNorm),
    Quadratic(QuadraticNorm),
    Polytopal(Polytope),
}

impl NormModel {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if !(P_MIN..=P_MAX).contains(&p) {
            return Err(Error::input(format!(
                "p = {p} outside the supported window [{P_MIN}, {P_MAX}]"
            )));
        }
        Ok(NormModel::Lp(LpNorm { p, dim }))
    }

    pub fn quadratic(g: Matrix) -> Result<Self> {
        if g.nrows() == 0 || g.nrows() != g.ncols() {
            return Err(Error::input("quadratic form must be a non-empty square matrix"));
        }
        if !is_finite_mat(&g) {
            return Err(Error::input("quadratic form has non-finite entries"));
        }
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-12 * g.amax().max(1.0) {
            return Err(Error::input(format!("quadratic form is not symmetric (defect {asym:e})")));
        }
        let g = (&g + g.transpose()) * 0.5;
        let eig = g.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::input("quadratic form is not positive definite"));
        }
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("quadratic form is singular"))?;
        Ok(NormModel::Quadratic(QuadraticNorm { g, g_inv }))
    }

    pub fn polytopal(vertices: Vec<Vector>) -> Result<Self> {
        let n = vertices
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::input("polytope needs at least one vertex"))?;
        if n == 0 || vertices.iter().any(|v| v.len() != n) {
            return Err(Error::input("polytope vertices have inconsistent dimensions"));
        }
        if vertices.iter().any(|v| !is_finite_vec(v)) {
            return Err(Error::input("polytope vertex has non-finite entries"));
        }
        let scale = vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        for v in &vertices {
            let neg = -v;
            if !vertices
                .iter()
                .any(|w| (w - &neg).amax() <= VERTEX_MATCH_TOL * scale.max(1.0))
            {
                return Err(Error::input(format!(
                    "vertex set is not centrally symmetric: missing antipode of {:?}",
                    v.as_slice()
                )));
            }
        }
        let m = Matrix::from_columns(&vertices);
        if m.rank(1e-10 * scale.max(1.0)) < n {
            return Err(Error::input("vertex set is not full-dimensional"));
        }
        let facets = enumerate_facets(&vertices)?;
        let poly = Polytope { vertices, facets };
        for v in &poly.vertices {
            let g = poly.eval(v);
            if g < 1.0 - 1e-9 {
                return Err(Error::input(format!(
                    "{:?} lies inside the convex hull of the other vertices",
                    v.as_slice()
                )));
            }
            let active: Vec<Vector> = poly.active_facets(v, 1e-9).into_iter().cloned().collect();
            let rank = Matrix::from_columns(&active).rank(1e-9);
            if rank < n {
                return Err(Error::input(format!(
                    "{:?} is not an extreme point of the vertex hull",
                    v.as_slice()
                )));
            }
        }
        Ok(NormModel::Polytopal(poly))
    }

    /// Vertices of a few named bodies: `square` (±1,±1), `diamond` (±e_i in 2-D),
    /// `hexagon`, `cube3`, `cross3`, `cubeN`/`crossN` for N in 2..=4.
    pub fn named_polytope(name: &str) -> Result<Self> {
        let verts = named_vertices(name)
            .ok_or_else(|| Error::input(format!("unknown polytope name `{name}`")))?;
        Self::polytopal(verts)
    }

    pub fn dim(&self) -> usize {
        match self {
            NormModel::Lp(l) => l.dim,
            NormModel::Quadratic(q) => q.g.nrows(),
            NormModel::Polytopal(p) => p.vertices[0].len(),
        }
    }

    pub fn classify(&self) -> SpaceClassification {
        match self {
            NormModel::Lp(_) | NormModel::Quadratic(_) => SpaceClassification {
                smooth: true,
                strictly_convex: true,
            },
            NormModel::Polytopal(_) => SpaceClassification {
                smooth: false,
                strictly_convex: false,
            },
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.classify().smooth
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.classify().strictly_convex
    }

    pub fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::input(format!(
                "vector of dimension {} given to a {}-dimensional model",
                x.len(),
                self.dim()
            )));
        }
        if !is_finite_vec(x) {
            return Err(Error::input("vector has non-finite entries"));
        }
        Ok(())
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval(x))
    }

    /// Norm evaluation without dimension validation.
    pub fn eval(&self, x: &Vector) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            NormModel::Lp(l) => l.eval(x),
            NormModel::Quadratic(q) => q.eval(x),
            NormModel::Polytopal(p) => p.eval(x),
        }
    }

    /// Dual norm, i.e. the support function `h(u) = max{u·x : ‖x‖ <= 1}` of the unit ball.
    pub fn support(&self, u: &Vector) -> f64 {
        match self {
            NormModel::Lp(l) => lp_norm(u.as_slice(), l.q()),
            NormModel::Quadratic(q) => u.dot(&(&q.g_inv * u)).max(0.0).sqrt(),
            NormModel::Polytopal(p) => p.vertices.iter().map(|v| v.dot(u)).fold(f64::MIN, f64::max),
        }
    }

    /// `m` points on the unit sphere from normalized Gaussian directions.
    /// In the plane the samples are returned sorted by polar angle.
    pub fn unit_sphere_samples(&self, m: usize, seed: u64) -> Result<Vec<Vector>> {
        if m == 0 {
            return Err(Error::input("sample count must be at least 1"));
        }
        let n = self.dim();
        let mut out = self.unit_directions(m, seed);
        if n == 2 {
            out.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        }
        Ok(out)
    }
}

impl NormModel {
    /// Unsorted unit vectors from normalized Gaussian draws.
    pub(crate) fn unit_directions(&self, m: usize, seed: u64) -> Vec<Vector> {
        let n = self.dim();
        let mut rng = rng(seed);
        (0..m)
            .map(|_| {
                let g = gaussian_vector(&mut rng, n);
                let r = self.eval(&g);
                g / r
            })
            .collect()
    }
}

fn named_vertices(name: &str) -> Option<Vec<Vector>> {
    let cube = |n: usize| -> Vec<Vector> {
        (0..1usize << n)
            .map(|mask| {
                Vector::from_iterator(n, (0..n).map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 }))
            })
            .collect()
    };
    let cross = |n: usize| -> Vec<Vector> {
        (0..n)
            .flat_map(|i| {
                [1.0, -1.0].into_iter().map(move |s| {
                    let mut e = Vector::zeros(n);
                    e[i] = s;
                    e
                })
            })
            .collect()
    };
    let polygon = |k: usize| -> Vec<Vector> {
        (0..k)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect()
    };
    match name {
        "square" => Some(cube(2)),
        "diamond" => Some(cross(2)),
        "hexagon" => Some(polygon(6)),
        "octagon" => Some(polygon(8)),
        _ => {
            if let Some(n) = name.strip_prefix("cube").and_then(|s| s.parse::<usize>().ok()) {
                (2..=4).contains(&n).then(|| cube(n))
            } else if let Some(n) = name.strip_prefix("cross").and_then(|s| s.parse::<usize>().ok()) {
                (2..=4).contains(&n).then(|| cross(n))
            } else {
                None
            }
        }
    }
}

/// Brute-force facet enumeration: every n-subset of vertices spanning a
/// hyperplane `a·x = 1` that supports the whole vertex set gives a facet.
fn enumerate_facets(vertices: &[Vector]) -> Result<Vec<Vector>> {
    let n = vertices[0].len();
    let count = vertices.len();
    let scale = vertices.iter().map(|v| v.amax()).fold(0.0, f64::max).max(1e-300);
    let mut facets: Vec<Vector> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    if count < n {
        return Err(Error::input("too few vertices for a full-dimensional polytope"));
    }
    loop {
        let rows = Matrix::from_fn(n, n, |r, c| vertices[idx[r]][c]);
        if let Some(inv) = rows.clone().try_inverse() {
            let a = inv * Vector::from_element(n, 1.0);
            if is_finite_vec(&a) && (&rows * &a).add_scalar(-1.0).amax() <= 1e-9 {
                let supports = vertices.iter().all(|v| a.dot(v) <= 1.0 + FACET_TOL);
                if supports
                    && !facets
                        .iter()
                        .any(|f| (f - &a).amax() <= 1e-8 * a.amax().max(1.0 / scale))
                {
                    facets.push(a);
                }
            }
        }
        // next combination in lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                facets.sort_by(|a, b| {
                    a.iter()
                        .zip(b.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                if facets.is_empty() {
                    return Err(Error::numeric("facet enumeration found no facets", f64::NAN));
                }
                return Ok(facets);
            }
            k -= 1;
            if idx[k] < count - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    g: Option<Vec<Vec<f64>>>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    v: Option<Vec<Vec<f64>>>,
    dim: usize,
}

impl Serialize for NormModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        let json = match self {
            NormModel::Lp(l) => ModelJson { kind: "lp".into(), p: Some(l.p), g: None, v: None, dim },
            NormModel::Quadratic(q) => ModelJson {
                kind: "quadratic".into(),
                p: None,
                g: Some(matrix_to_rows(&q.g)),
                v: None,
                dim,
            },
            NormModel::Polytopal(p) => ModelJson {
                kind: "polytopal".into(),
                p: None,
                g: None,
                v: Some(p.vertices.iter().map(|v| v.as_slice().to_vec()).collect()),
                dim,
            },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = ModelJson::deserialize(d)?;
        let model = match json.kind.as_str() {
            "lp" => {
                let p = json.p.ok_or_else(|| D::Error::missing_field("p"))?;
                NormModel::lp(p, json.dim)
            }
            "quadratic" => {
                let rows = json.g.ok_or_else(|| D::Error::missing_field("G"))?;
                let g = matrix_from_rows(&rows).map_err(D::Error::custom)?;
                NormModel::quadratic(g)
            }
            "polytopal" => {
                let rows = json.v.ok_or_else(|| D::Error::missing_field("V"))?;
                NormModel::polytopal(rows.into_iter().map(Vector::from_vec).collect())
            }
            other => return Err(D::Error::custom(format!("unknown norm kind `{other}`"))),
        }
        .map_err(D::Error::custom)?;
        if model.dim() != json.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} does not match data dimension {}",
                json.dim,
                model.dim()
            )));
        }
        Ok(model)
    }
}
