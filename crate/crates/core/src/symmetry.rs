//! Linear isometry groups of polytopal unit balls.
//!
//! After the congruence that turns the Löwner ellipsoid into the Euclidean
//! ball, every linear isometry of the norm is orthogonal. The group is found
//! by matching a fixed spanning tuple of vertices against all vertex tuples
//! with the same lengths and mutual inner products.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ellipsoid::lowner;
use crate::error::{Error, Result};
use crate::linalg::{spd_sqrt, Matrix, Vector};
use crate::normspace::NormModel;

pub const MAX_VERTICES: usize = 200;
pub const MAX_DIM: usize = 4;
pub const MAX_CANDIDATES: usize = 1_000_000;
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupClass {
    Cyclic(usize),
    Dihedral(usize),
    FiniteOther,
    InfiniteDetected,
}

impl fmt::Display for GroupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupClass::Cyclic(k) => write!(f, "cyclic({k})"),
            GroupClass::Dihedral(k) => write!(f, "dihedral({k})"),
            GroupClass::FiniteOther => f.write_str("finite-other"),
            GroupClass::InfiniteDetected => f.write_str("infinite-detected"),
        }
    }
}

impl std::str::FromStr for GroupClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let arg = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.parse().ok()
        };
        match s {
            "finite-other" => Ok(GroupClass::FiniteOther),
            "infinite-detected" => Ok(GroupClass::InfiniteDetected),
            _ => arg("cyclic")
                .map(GroupClass::Cyclic)
                .or_else(|| arg("dihedral").map(GroupClass::Dihedral))
                .ok_or_else(|| Error::input(format!("unknown group classification `{s}`"))),
        }
    }
}

impl Serialize for GroupClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod serde_matrices {
    use crate::linalg::{matrix_from_rows, matrix_to_rows, Matrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[Matrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Matrix>, D::Error> {
        Vec::<Vec<Vec<f64>>>::deserialize(d)?
            .iter()
            .map(|rows| matrix_from_rows(rows).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointGroup {
    pub order: usize,
    pub classification: GroupClass,
    #[serde(with = "serde_matrices")]
    pub elements: Vec<Matrix>,
    pub closure_verified: bool,
}

impl PointGroup {
    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |m| m.nrows())
    }

    /// Index of the element equal to `m` within the matching tolerance.
    pub fn find(&self, m: &Matrix) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| (e - m).amax() <= MATCH_TOL * m.amax().max(1.0))
    }

    pub fn determinants(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.determinant()).collect()
    }
}

fn find_vertex(vertices: &[Vector], x: &Vector, tol: f64) -> Option<usize> {
    vertices.iter().position(|v| (v - x).amax() <= tol)
}

/// Greedy choice of `n` vertices with the largest successive residuals.
fn reference_tuple(w: &[Vector], n: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut basis: Vec<Vector> = Vec::with_capacity(n);
    for _ in 0..n {
        let residual = |v: &Vector| {
            let mut r = v.clone();
            for b in &basis {
                r -= b * b.dot(&r);
            }
            r
        };
        let (best, _) = w
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, v)| (i, residual(v).norm()))
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 + 1e-12 { b } else { a });
        let r = residual(&w[best]);
        basis.push(r.normalize());
        chosen.push(best);
    }
    chosen
}

/// Linear isometry group of the polytope with vertex set `vertices`.
pub fn polytopal_isometry_group(vertices: &[Vector], tol: f64) -> Result<PointGroup> {
    let model = NormModel::polytopal(vertices.to_vec())?;
    let n = model.dim();
    if vertices.len() > MAX_VERTICES || n > MAX_DIM {
        return Err(Error::input(format!(
            "enumeration is limited to {MAX_VERTICES} vertices in dimension ≤ {MAX_DIM}"
        )));
    }
    let tol = tol.max(MATCH_TOL);
    let outer = lowner(vertices, 1e-10)?;
    let (root, inv_root) =
        spd_sqrt(&outer.shape).ok_or_else(|| Error::numeric("Löwner shape is not positive definite", f64::NAN))?;
    let w: Vec<Vector> = vertices.iter().map(|v| &root * v).collect();
    let reference = reference_tuple(&w, n);
    let r = Matrix::from_columns(&reference.iter().map(|&i| w[i].clone()).collect::<Vec<_>>());
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("reference tuple is not a basis".into()))?;
    let scale = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let fp_tol = tol * scale * scale;

    // backtracking over image tuples consistent with lengths and inner products
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut visited = 0usize;
    fn extend(
        depth: usize,
        stack: &mut Vec<usize>,
        w: &[Vector],
        reference: &[usize],
        fp_tol: f64,
        tuples: &mut Vec<Vec<usize>>,
        visited: &mut usize,
    ) -> Result<()> {
        if depth == reference.len() {
            tuples.push(stack.clone());
            return Ok(());
        }
        let target = &w[reference[depth]];
        for (j, cand) in w.iter().enumerate() {
            if (cand.norm_squared() - target.norm_squared()).abs() > fp_tol {
                continue;
            }
            let consistent = stack
                .iter()
                .zip(reference)
                .all(|(&s, &rf)| (w[s].dot(cand) - w[rf].dot(target)).abs() <= fp_tol);
            if !consistent {
                continue;
            }
            *visited += 1;
            if *visited > MAX_CANDIDATES {
                return Err(Error::Resource(format!("more than {MAX_CANDIDATES} candidate tuples")));
            }
            stack.push(j);
            extend(depth + 1, stack, w, reference, fp_tol, tuples, visited)?;
            stack.pop();
        }
        Ok(())
    }
    extend(0, &mut stack, &w, &reference, fp_tol, &mut tuples, &mut visited)?;

    let id = Matrix::identity(n, n);
    let mut elements: Vec<Matrix> = Vec::new();
    for tuple in tuples {
        let img = Matrix::from_columns(&tuple.iter().map(|&j| w[j].clone()).collect::<Vec<_>>());
        let m = img * &r_inv;
        if (m.transpose() * &m - &id).amax() > tol {
            continue;
        }
        let permutes = w.iter().all(|v| find_vertex(&w, &(&m * v), tol * scale).is_some());
        if !permutes {
            continue;
        }
        let u = &inv_root * m * &root;
        // exact certificate in the original coordinates
        if vertices.iter().all(|v| find_vertex(vertices, &(&u * v), tol * 10.0 * scale.max(1.0)).is_some()) {
            elements.push(u);
        }
    }
    elements.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    elements.dedup_by(|a, b| (&*a - &*b).amax() <= tol);
    let classification = classify(n, &elements);
    let mut group = PointGroup {
        order: elements.len(),
        classification,
        elements,
        closure_verified: false,
    };
    verify_closure(&group)?;
    group.closure_verified = true;
    Ok(group)
}

fn classify(n: usize, elements: &[Matrix]) -> GroupClass {
    if n != 2 {
        return GroupClass::FiniteOther;
    }
    if elements.iter().all(|e| e.determinant() > 0.0) {
        GroupClass::Cyclic(elements.len())
    } else {
        GroupClass::Dihedral(elements.len() / 2)
    }
}

/// Identity, `−I`, products and inverses must all be group elements.
pub fn verify_closure(group: &PointGroup) -> Result<()> {
    let n = group.dim();
    let id = Matrix::identity(n, n);
    let fail = |what: &str| Err(Error::Internal(format!("group closure failed: {what}")));
    if group.find(&id).is_none() {
        return fail("identity missing");
    }
    if group.find(&(-&id)).is_none() {
        return fail("point reflection −I missing");
    }
    for a in &group.elements {
        let inv = match a.clone().try_inverse() {
            Some(inv) => inv,
            None => return fail("singular element"),
        };
        if group.find(&inv).is_none() {
            return fail("inverse missing");
        }
        for b in &group.elements {
            if group.find(&(a * b)).is_none() {
                return fail("product missing");
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Semidirect {
    pub translations: String,
    pub point_stabilizer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point_group: Option<PointGroup>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<usize>,
    pub classification: GroupClass,
    pub semidirect: Semidirect,
    pub finite: bool,
    pub determinants: Vec<f64>,
    /// For infinite groups: a one-parameter family of isometries and one
    /// member of infinite order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default, with = "opt_matrix")]
    pub witness: Option<Matrix>,
}

mod opt_matrix {
    use crate::linalg::{matrix_from_rows, matrix_to_rows, Matrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Matrix>, D::Error> {
        Option::<Vec<Vec<f64>>>::deserialize(d)?
            .map(|rows| matrix_from_rows(&rows).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Isometry group of the normed space: all translations together with the
/// linear isometries fixing the origin.
pub fn group_report(model: &NormModel, tol: f64) -> Result<GroupReport> {
    let n = model.dim();
    let semidirect = |stab: &str| Semidirect {
        translations: format!("all of R^{n}"),
        point_stabilizer: stab.to_string(),
    };
    match model {
        NormModel::Polytopal(p) => {
            let group = polytopal_isometry_group(p.vertices(), tol)?;
            Ok(GroupReport {
                order: Some(group.order),
                classification: group.classification,
                semidirect: semidirect(&format!("finite point group of order {}", group.order)),
                finite: true,
                determinants: group.determinants(),
                witness_family: None,
                witness: None,
                point_group: Some(group),
            })
        }
        NormModel::Quadratic(q) => {
            let (root, inv_root) = spd_sqrt(q.gram())
                .ok_or_else(|| Error::numeric("Gram matrix is not positive definite", f64::NAN))?;
            // a rotation by 1 radian in the first coordinate plane has infinite order
            let mut r = Matrix::identity(n, n);
            if n >= 2 {
                let (s, c) = 1f64.sin_cos();
                r[(0, 0)] = c;
                r[(0, 1)] = -s;
                r[(1, 0)] = s;
                r[(1, 1)] = c;
            } else {
                r[(0, 0)] = -1.0;
            }
            let witness = &inv_root * r * &root;
            Ok(GroupReport {
                point_group: None,
                order: None,
                classification: if n >= 2 { GroupClass::InfiniteDetected } else { GroupClass::Cyclic(2) },
                semidirect: semidirect("G^{-1/2} O(n) G^{1/2}"),
                finite: n < 2,
                determinants: vec![1.0, -1.0],
                witness_family: Some("G^{-1/2} R G^{1/2} for every orthogonal R".into()),
                witness: Some(witness),
            })
        }
        NormModel::Lp(_) => Err(Error::Unsupported {
            op: "group_report",
            gate: "model-kind",
            reason: "isometry groups are certified only for polytopal and quadratic unit balls".into(),
        }),
    }
}

/// Distinct images of `x` under the group, deduplicated at `1e−9`.
pub fn orbit_probe(model: &NormModel, x: &Vector, group: &PointGroup) -> Result<Vec<Vector>> {
    model.check_dim(x)?;
    if !group.closure_verified {
        return Err(Error::Precondition("orbit_probe needs a closure-verified group".into()));
    }
    if group.dim() != x.len() {
        return Err(Error::input("group and vector dimensions differ"));
    }
    let mut orbit: Vec<Vector> = Vec::new();
    for g in &group.elements {
        let y = g * x;
        if !orbit.iter().any(|o| (o - &y).amax() <= MATCH_TOL) {
            orbit.push(y);
        }
    }
    Ok(orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{is_isometry, LinearOperator, Sampling};
    use crate::sip::SipContext;
    use nalgebra::{dmatrix, dvector};

    fn vertices(name: &str) -> Vec<Vector> {
        match NormModel::named_polytope(name).unwrap() {
            NormModel::Polytopal(p) => p.vertices().to_vec(),
            _ => unreachable!(),
        }
    }

    // independent oracle: signed permutation matrices preserving the vertex set
    fn signed_permutation_count(v: &[Vector]) -> usize {
        let n = v[0].len();
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..n {
            perms = perms
                .into_iter()
                .flat_map(|p| {
                    (0..n)
                        .filter(|i| !p.contains(i))
                        .map(|i| [p.clone(), vec![i]].concat())
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        let mut count = 0;
        for p in perms {
            for signs in 0..1usize << n {
                let m = Matrix::from_fn(n, n, |r, c| {
                    if p[c] == r {
                        if signs & (1 << c) != 0 { -1.0 } else { 1.0 }
                    } else {
                        0.0
                    }
                });
                if v.iter().all(|x| v.iter().any(|y| (&m * x - y).amax() < 1e-12)) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn cube_and_cross() {
        let cube = vertices("cube3");
        let g = polytopal_isometry_group(&cube, 1e-9).unwrap();
        assert_eq!(g.order, 48);
        assert_eq!(signed_permutation_count(&cube), 48);
        assert_eq!(g.classification, GroupClass::FiniteOther);
        assert!(g.closure_verified);
        let g = polytopal_isometry_group(&vertices("cross3"), 1e-9).unwrap();
        assert_eq!(g.order, 48);
    }

    #[test]
    fn plane_groups() {
        let diamond = vec![dvector![1.0, 0.0], dvector![-1.0, 0.0], dvector![0.0, 1.0], dvector![0.0, -1.0]];
        let g = polytopal_isometry_group(&diamond, 1e-9).unwrap();
        assert_eq!((g.order, g.classification), (8, GroupClass::Dihedral(4)));
        let g = polytopal_isometry_group(&vertices("hexagon"), 1e-9).unwrap();
        assert_eq!((g.order, g.classification), (12, GroupClass::Dihedral(6)));
    }

    #[test]
    fn affine_image_keeps_the_group_order() {
        let a = dmatrix![2.0, 0.7; 0.1, 0.5];
        let hex: Vec<Vector> = vertices("hexagon").iter().map(|v| &a * v).collect();
        let g = polytopal_isometry_group(&hex, 1e-9).unwrap();
        assert_eq!(g.order, 12);
    }

    #[test]
    fn pinwheel_is_cyclic() {
        // quarter-turn symmetric octagon whose second vertex ring is twisted
        let v: Vec<Vector> = (0..4)
            .flat_map(|k| {
                let t = std::f64::consts::FRAC_PI_2 * k as f64;
                [dvector![t.cos(), t.sin()], dvector![0.8 * (t + 0.6).cos(), 0.8 * (t + 0.6).sin()]]
            })
            .collect();
        let g = polytopal_isometry_group(&v, 1e-9).unwrap();
        assert_eq!((g.order, g.classification), (4, GroupClass::Cyclic(4)));
    }

    #[test]
    fn parallelogram_is_a_square() {
        // affinely equivalent to the square, so the norm has the same group
        let v = vec![dvector![2.0, 1.0], dvector![-2.0, 1.0], dvector![2.0, -1.0], dvector![-2.0, -1.0]];
        let g = polytopal_isometry_group(&v, 1e-9).unwrap();
        assert_eq!((g.order, g.classification), (8, GroupClass::Dihedral(4)));
    }

    #[test]
    fn generic_hexagon_has_only_the_point_reflection() {
        let v: Vec<Vector> = [dvector![1.0, 0.0], dvector![0.3, 1.0], dvector![-0.8, 0.9]]
            .into_iter()
            .flat_map(|p| [p.clone(), -p])
            .collect();
        let g = polytopal_isometry_group(&v, 1e-9).unwrap();
        assert_eq!((g.order, g.classification), (2, GroupClass::Cyclic(2)));
    }

    #[test]
    fn elements_are_isometries() {
        let model = NormModel::named_polytope("octagon").unwrap();
        let ctx = SipContext::new(model.clone());
        let g = polytopal_isometry_group(&vertices("octagon"), 1e-9).unwrap();
        assert_eq!(g.order, 16);
        for e in &g.elements {
            let r = is_isometry(&ctx, &LinearOperator::new(e.clone()).unwrap(), Sampling::new(100, 1), 1e-9).unwrap();
            assert!(r.verdict, "{e}");
        }
    }

    #[test]
    fn reports() {
        let r = group_report(&NormModel::named_polytope("square").unwrap(), 1e-9).unwrap();
        assert_eq!((r.order, r.classification, r.finite), (Some(8), GroupClass::Dihedral(4), true));
        assert!(r.determinants.iter().all(|d| (d.abs() - 1.0).abs() < 1e-9));
        let q = group_report(&NormModel::quadratic(Matrix::identity(2, 2)).unwrap(), 1e-9).unwrap();
        assert_eq!(q.classification, GroupClass::InfiniteDetected);
        assert!(!q.finite && q.witness.is_some());
        let g = dmatrix![3.0, 1.0; 1.0, 1.0];
        let q = group_report(&NormModel::quadratic(g.clone()).unwrap(), 1e-9).unwrap();
        let w = q.witness.unwrap();
        assert!((w.transpose() * &g * &w - g).amax() < 1e-12);
        let r = group_report(&NormModel::named_polytope("cross3").unwrap(), 1e-9).unwrap();
        assert_eq!(r.order, Some(48));
        assert!(matches!(group_report(&NormModel::lp(3.0, 2).unwrap(), 1e-9), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn json_shape() {
        let g = polytopal_isometry_group(&vertices("square"), 1e-9).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["order"], 8);
        assert_eq!(v["classification"], "dihedral(4)");
        assert_eq!(v["elements"].as_array().unwrap().len(), 8);
        let back: PointGroup = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn orbits() {
        let sq = NormModel::named_polytope("square").unwrap();
        let g = polytopal_isometry_group(&vertices("square"), 1e-9).unwrap();
        assert_eq!(orbit_probe(&sq, &dvector![1.0, 0.0], &g).unwrap().len(), 4);
        assert_eq!(orbit_probe(&sq, &dvector![0.0, 0.0], &g).unwrap().len(), 1);
        let cube = NormModel::named_polytope("cube3").unwrap();
        let g = polytopal_isometry_group(&vertices("cube3"), 1e-9).unwrap();
        let x = dvector![1.0, 1.0, 1.0] / 3f64.sqrt();
        assert_eq!(orbit_probe(&cube, &x, &g).unwrap().len(), 8);
        let unverified = PointGroup { closure_verified: false, ..g };
        assert!(orbit_probe(&cube, &x, &unverified).is_err());
    }

    #[test]
    fn four_dimensional_cube() {
        let g = polytopal_isometry_group(&vertices("cube4"), 1e-9).unwrap();
        assert_eq!(g.order, 384);
    }
}
