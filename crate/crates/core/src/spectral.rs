//! Real block normal forms.
//!
//! A diagonalizable operator splits into 1-D eigenblocks and 2-D blocks
//! `|λ|·[[cos φ, sin φ], [−sin φ, cos φ]]`, one per conjugate pair of
//! eigenvalues. The isometry and adjoint-abelian variants additionally pick
//! bases inside eigenspaces that are orthogonal for the semi-inner product
//! and record the orthogonality residuals they achieve.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diag, is_finite_mat, serde_matrix, serde_vector, Matrix, Vector};
use crate::operators::{is_adjoint_abelian, is_isometry, LinearOperator, Sampling};
use crate::ortho::birkhoff_direction_in_plane;
use crate::sip::SipContext;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Block {
    Real1D {
        lambda: f64,
        col: usize,
    },
    Plane2D {
        modulus: f64,
        angle: f64,
        basis_cols: (usize, usize),
    },
}

impl Block {
    pub fn dim(&self) -> usize {
        match self {
            Block::Real1D { .. } => 1,
            Block::Plane2D { .. } => 2,
        }
    }

    pub fn cols(&self) -> Vec<usize> {
        match *self {
            Block::Real1D { col, .. } => vec![col],
            Block::Plane2D { basis_cols: (i, j), .. } => vec![i, j],
        }
    }

    /// The block's own matrix in its basis.
    pub fn matrix(&self) -> Matrix {
        match *self {
            Block::Real1D { lambda, .. } => Matrix::from_element(1, 1, lambda),
            Block::Plane2D { modulus, angle, .. } => rotation_block(modulus, angle),
        }
    }
}

/// `modulus·[[cos φ, sin φ], [−sin φ, cos φ]]`.
pub fn rotation_block(modulus: f64, angle: f64) -> Matrix {
    let (s, c) = angle.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, s, -s, c]) * modulus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    #[serde(rename = "P", with = "serde_matrix")]
    pub basis: Matrix,
    pub blocks: Vec<Block>,
    pub residual: f64,
}

impl NormalForm {
    pub fn block_matrix(&self) -> Matrix {
        block_diag(&self.blocks.iter().map(Block::matrix).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn block_vectors(&self, block: &Block) -> Vec<Vector> {
        block.cols().into_iter().map(|c| self.basis.column(c).into_owned()).collect()
    }
}

/// `P·blockdiag·P⁻¹`.
pub fn reconstruct(nf: &NormalForm) -> Result<LinearOperator> {
    let inv = nf
        .basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numeric("normal-form basis is singular", f64::INFINITY))?;
    LinearOperator::new(&nf.basis * nf.block_matrix() * inv)
}

fn angle_in_range(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    if r == 0.0 {
        TWO_PI
    } else {
        r
    }
}

struct Cluster {
    value: Complex<f64>,
    members: Vec<Complex<f64>>,
}

fn cluster(values: &[Complex<f64>], tol: f64) -> Vec<Cluster> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Cluster> = Vec::new();
    for v in sorted {
        if let Some(c) = out.iter_mut().find(|c| (c.value - v).norm() <= tol) {
            c.members.push(v);
            let n = c.members.len() as f64;
            c.value = c.members.iter().sum::<Complex<f64>>() / n;
        } else {
            out.push(Cluster {
                value: v,
                members: vec![v],
            });
        }
    }
    out
}

fn complex_matrix(a: &Matrix) -> DMatrix<Complex<f64>> {
    a.map(|x| Complex::new(x, 0.0))
}

/// Right null vectors of a complex matrix (singular values <= `thresh`),
/// plus the smallest right singular vector as a fallback.
fn complex_null(m: &DMatrix<Complex<f64>>, thresh: f64) -> (Vec<nalgebra::DVector<Complex<f64>>>, nalgebra::DVector<Complex<f64>>) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let n = m.ncols();
    let mut null = Vec::new();
    let mut smallest = 0;
    for i in 0..n {
        if svd.singular_values[i] < svd.singular_values[smallest] {
            smallest = i;
        }
        if svd.singular_values[i] <= thresh {
            null.push(vt.row(i).adjoint());
        }
    }
    (null, vt.row(smallest).adjoint())
}

fn canonical_real(v: Vector) -> Vector {
    let mut idx = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[idx].abs() * (1.0 + 1e-12) {
            idx = i;
        }
    }
    let v = if v[idx] < 0.0 { -v } else { v };
    let n = v.norm();
    snap(v / n)
}

/// Rotate the complex phase so the largest component is real positive and
/// scale so the real part has unit length. Returns `(re, im)`.
fn canonical_complex(u: &nalgebra::DVector<Complex<f64>>) -> (Vector, Vector) {
    let mut idx = 0;
    for i in 0..u.len() {
        if u[i].norm() > u[idx].norm() * (1.0 + 1e-12) {
            idx = i;
        }
    }
    let phase = Complex::from_polar(1.0, -u[idx].arg());
    let w = u.map(|z| z * phase);
    let re = w.map(|z| z.re);
    let im = w.map(|z| z.im);
    let s = re.norm();
    (snap(re / s), snap(im / s))
}

/// Zero out round-off entries; `l_p` geometry near the axes amplifies them.
fn snap(mut v: Vector) -> Vector {
    let scale = v.amax();
    v.iter_mut().filter(|x| x.abs() <= 1e-14 * scale).for_each(|x| *x = 0.0);
    v
}

enum Piece {
    Real(f64, Vector),
    Plane(f64, f64, Vector, Vector),
}

/// Eigen-decomposition into real 1-D and 2-D blocks.
///
/// Blocks are ordered by decreasing real eigenvalue, then 2-D blocks by
/// increasing modulus and angle. Conjugate pairs contribute one block with
/// angle `arg λ` for the member with positive imaginary part.
pub fn real_block_decomposition(a: &LinearOperator, tol: f64) -> Result<NormalForm> {
    let m = a.matrix();
    let n = m.nrows();
    if !is_finite_mat(m) {
        return Err(Error::input("operator has non-finite entries"));
    }
    let scale = m.norm().max(1e-300);
    let eig = m.clone().complex_eigenvalues();
    let real_tol = 1e-9 * scale.max(1.0);
    let clusters = cluster(eig.as_slice(), 1e-6 * scale.max(1.0));
    let null_thresh = 1e-9 * scale.max(1.0);
    let mut pieces: Vec<Piece> = Vec::new();

    // conjugate bookkeeping: clusters in the lower half plane must mirror upper ones
    let upper: Vec<&Cluster> = clusters.iter().filter(|c| c.value.im > real_tol).collect();
    let lower: Vec<&Cluster> = clusters.iter().filter(|c| c.value.im < -real_tol).collect();
    for c in &upper {
        let partner = lower
            .iter()
            .find(|l| (l.value.conj() - c.value).norm() <= 1e-9 * scale.max(1.0) * 1e3 && l.members.len() == c.members.len());
        if partner.is_none() {
            return Err(Error::numeric(
                format!("eigenvalue {} has no conjugate partner", c.value),
                f64::NAN,
            ));
        }
    }

    for c in &clusters {
        let mult = c.members.len();
        if c.value.im.abs() <= real_tol {
            let lambda = c.value.re;
            let shifted = m - Matrix::identity(n, n) * lambda;
            let null = crate::linalg::null_space(&shifted, null_thresh / scale.max(1.0));
            let vectors: Vec<Vector> = if null.ncols() >= mult {
                (0..mult).map(|k| null.column(k).into_owned()).collect()
            } else if distinct(&c.members, scale) {
                c.members
                    .iter()
                    .map(|mu| {
                        let sh = complex_matrix(&(m - Matrix::identity(n, n) * mu.re));
                        let (_, smallest) = complex_null(&sh, 0.0);
                        let (re, _) = canonical_complex(&smallest);
                        re
                    })
                    .collect()
            } else {
                return Err(Error::Defective {
                    eigenvalue: format!("{lambda}"),
                    algebraic: mult,
                    geometric: null.ncols(),
                });
            };
            for (k, v) in vectors.into_iter().enumerate() {
                let lam = if distinct(&c.members, scale) && null.ncols() < mult {
                    c.members[k].re
                } else {
                    lambda
                };
                pieces.push(Piece::Real(lam, canonical_real(v)));
            }
        } else if c.value.im > 0.0 {
            let lambda = c.value;
            let shifted = complex_matrix(m) - DMatrix::<Complex<f64>>::identity(n, n) * lambda;
            let (null, _) = complex_null(&shifted, null_thresh);
            if null.len() < mult {
                return Err(Error::Defective {
                    eigenvalue: format!("{lambda}"),
                    algebraic: mult,
                    geometric: null.len(),
                });
            }
            for u in null.iter().take(mult) {
                let (re, im) = canonical_complex(u);
                pieces.push(Piece::Plane(lambda.norm(), angle_in_range(lambda.arg()), re, im));
            }
        }
    }

    pieces.sort_by(|p, q| match (p, q) {
        (Piece::Real(a, _), Piece::Real(b, _)) => b.total_cmp(a),
        (Piece::Real(..), Piece::Plane(..)) => std::cmp::Ordering::Less,
        (Piece::Plane(..), Piece::Real(..)) => std::cmp::Ordering::Greater,
        (Piece::Plane(ma, aa, ..), Piece::Plane(mb, ab, ..)) => ma.total_cmp(mb).then(aa.total_cmp(ab)),
    });

    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    let mut blocks = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match piece {
            Piece::Real(lambda, v) => {
                blocks.push(Block::Real1D { lambda, col: cols.len() });
                cols.push(v);
            }
            Piece::Plane(modulus, angle, re, im) => {
                let k = cols.len();
                blocks.push(Block::Plane2D {
                    modulus,
                    angle,
                    basis_cols: (k, k + 1),
                });
                cols.push(re);
                cols.push(im);
            }
        }
    }
    if cols.len() != n {
        return Err(Error::Internal(format!("blocks cover {} of {n} dimensions", cols.len())));
    }
    let basis = Matrix::from_columns(&cols);
    finish(basis, blocks, m, tol)
}

fn distinct(members: &[Complex<f64>], scale: f64) -> bool {
    members.iter().enumerate().all(|(i, a)| {
        members
            .iter()
            .skip(i + 1)
            .all(|b| (a - b).norm() > 1e-12 * scale.max(1.0))
    })
}

fn finish(basis: Matrix, blocks: Vec<Block>, target: &Matrix, tol: f64) -> Result<NormalForm> {
    let cond = crate::linalg::condition_number(&basis);
    if !(cond < 1e10) {
        return Err(Error::Defective {
            eigenvalue: "(nearly coalescing eigenvectors)".into(),
            algebraic: basis.ncols(),
            geometric: basis.rank(1e-10),
        });
    }
    let mut nf = NormalForm {
        basis,
        blocks,
        residual: 0.0,
    };
    let rebuilt = reconstruct(&nf)?;
    let denom = target.norm();
    let diff = (rebuilt.matrix() - target).norm();
    nf.residual = if denom > 0.0 { diff / denom } else { diff };
    if nf.residual > tol {
        return Err(Error::numeric("block decomposition does not reproduce the operator", nf.residual));
    }
    Ok(nf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum AuerbachOutcome {
    #[serde(rename = "found")]
    Found {
        #[serde(with = "serde_vector")]
        a: Vector,
        #[serde(with = "serde_vector")]
        b: Vector,
        residual: f64,
    },
    #[serde(rename = "failed")]
    Failed {
        #[serde(with = "serde_vector")]
        a: Vector,
        #[serde(with = "serde_vector")]
        b: Vector,
        best_residual: f64,
    },
}

impl AuerbachOutcome {
    pub fn pair(&self) -> (&Vector, &Vector) {
        match self {
            AuerbachOutcome::Found { a, b, .. } | AuerbachOutcome::Failed { a, b, .. } => (a, b),
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            AuerbachOutcome::Found { residual, .. } => *residual,
            AuerbachOutcome::Failed { best_residual, .. } => *best_residual,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, AuerbachOutcome::Found { .. })
    }
}

const AUERBACH_GRID: usize = 2048;

/// Unit vectors `a, b` spanning the given plane with `[a, b] = [b, a] = 0`.
///
/// For each direction `a(θ)` on a half-circle grid, `b` is the Birkhoff
/// orthogonal direction to `a` inside the plane (so `[a, b] = 0` up to
/// bisection accuracy) and the residual is `|[b, a]|`. The best grid point
/// is polished by golden-section search.
pub fn auerbach_pair(ctx: &SipContext, plane: (&Vector, &Vector), tol: f64) -> Result<AuerbachOutcome> {
    if !ctx.model().is_smooth() {
        return Err(Error::Unsupported {
            op: "auerbach_pair",
            gate: "classify",
            reason: "needs the unique semi-inner product of a smooth model".into(),
        });
    }
    ctx.model().check_dim(plane.0)?;
    ctx.model().check_dim(plane.1)?;
    let q1 = plane.0.normalize();
    let q2 = plane.1 - &q1 * q1.dot(plane.1);
    if !(q2.norm() > 1e-10 * plane.1.norm().max(1e-300)) || !q1.iter().all(|v| v.is_finite()) {
        return Err(Error::input("plane basis vectors are linearly dependent"));
    }
    let q2 = q2.normalize();
    let eval = |theta: f64| -> (f64, Vector, Vector) {
        let dir = &q1 * theta.cos() + &q2 * theta.sin();
        let a = &dir / ctx.norm(&dir);
        let b = birkhoff_direction_in_plane(ctx, &a, (&q1, &q2));
        let r = ctx.sip_raw(&a, &b).abs().max(ctx.sip_raw(&b, &a).abs());
        (r, a, b)
    };
    let step = std::f64::consts::PI / AUERBACH_GRID as f64;
    let grid: Vec<f64> = (0..AUERBACH_GRID).map(|k| eval(k as f64 * step).0).collect();
    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    // ties at round-off level go to the earliest direction, so exact pairs
    // such as the coordinate axes are returned verbatim
    let k = grid.iter().position(|&r| r <= min + 1e-13).unwrap_or(0);
    let best = (grid[k], k as f64 * step);
    let (mut r, mut a, mut b) = eval(best.1);
    if r > tol {
        let (theta, _) = crate::linalg::golden_section(|t| eval(t).0, best.1 - step, best.1 + step, 120);
        let (r2, a2, b2) = eval(theta);
        if r2 < r {
            r = r2;
            a = a2;
            b = b2;
        }
    }
    Ok(if r <= tol {
        AuerbachOutcome::Found { a, b, residual: r }
    } else {
        AuerbachOutcome::Failed { a, b, best_residual: r }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPairResidual {
    pub first: usize,
    pub second: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub block: usize,
    pub auerbach: AuerbachOutcome,
    /// Distance of the restricted operator, written in the Auerbach basis,
    /// from `modulus·F_φ`.
    pub rotation_defect: f64,
    /// `max |‖A z‖/modulus − ‖z‖|` over sampled `z` of the plane.
    pub scaled_isometry_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedNormalForm {
    #[serde(flatten)]
    pub normal_form: NormalForm,
    pub fixed_count: usize,
    pub reflected_count: usize,
    pub plane_count: usize,
    /// Semi-inner-product orthogonality residual for each pair of blocks.
    pub orthogonality: Vec<BlockPairResidual>,
    pub planes: Vec<PlaneRecord>,
}

/// Max of `|[v, u]|` (and `|[u, v]|` when `both_ways`) over basis vectors of two blocks.
pub fn block_orthogonality(ctx: &SipContext, nf: &NormalForm, both_ways: bool) -> Result<Vec<BlockPairResidual>> {
    if !ctx.model().is_smooth() {
        return Err(Error::Unsupported {
            op: "block_orthogonality",
            gate: "classify",
            reason: "needs the unique semi-inner product of a smooth model".into(),
        });
    }
    let mut out = Vec::new();
    for (i, bi) in nf.blocks.iter().enumerate() {
        for (j, bj) in nf.blocks.iter().enumerate().skip(i + 1) {
            let mut r = 0.0f64;
            for u in nf.block_vectors(bi) {
                for v in nf.block_vectors(bj) {
                    r = r.max(ctx.sip_raw(&v, &u).abs());
                    if both_ways {
                        r = r.max(ctx.sip_raw(&u, &v).abs());
                    }
                }
            }
            out.push(BlockPairResidual {
                first: i,
                second: j,
                residual: r,
            });
        }
    }
    Ok(out)
}

/// Replace a basis of one eigenspace by a flag-orthogonal one:
/// `[u_k, u_j] = 0` for `j < k`, each vector of unit model norm.
fn flag_orthogonal(ctx: &SipContext, space: &[Vector]) -> Vec<Vector> {
    let mut chosen: Vec<Vector> = Vec::with_capacity(space.len());
    let m = space.len();
    let basis = Matrix::from_columns(space);
    for k in 0..m {
        // coefficients c with [basis·c, u_j] = 0 for the already chosen u_j
        let v = if chosen.is_empty() {
            basis.column(0).into_owned()
        } else {
            let constraints = Matrix::from_fn(chosen.len(), m, |r, c| {
                ctx.duality_raw(&chosen[r]).dot(&basis.column(c))
            });
            let null = crate::linalg::null_space(&constraints, 1e-10);
            let coeffs = null.column(0).into_owned();
            &basis * coeffs
        };
        let _ = k;
        let v = canonical_real(v);
        let nv = ctx.norm(&v);
        chosen.push(v / nv);
    }
    chosen
}

fn plane_record(ctx: &SipContext, a: &LinearOperator, nf: &NormalForm, index: usize, tol: f64) -> Result<PlaneRecord> {
    let Block::Plane2D { modulus, angle, basis_cols: (i, j) } = nf.blocks[index] else {
        return Err(Error::Internal("plane record requested for a 1-D block".into()));
    };
    let p1 = nf.basis.column(i).into_owned();
    let p2 = nf.basis.column(j).into_owned();
    let auerbach = auerbach_pair(ctx, (&p1, &p2), tol)?;
    let (ua, ub) = auerbach.pair();
    let frame = Matrix::from_columns(&[ua.clone(), ub.clone()]);
    // coordinates of A·frame in the frame (least squares inside the plane)
    let image = a.matrix() * &frame;
    let coords = frame
        .clone()
        .svd(true, true)
        .solve(&image, 1e-14)
        .map_err(|e| Error::Internal(e.to_string()))?;
    let rotation_defect = (coords - rotation_block(modulus, angle)).amax();
    let mut scaled = 0.0f64;
    for k in 0..64 {
        let t = TWO_PI * k as f64 / 64.0;
        let z = &p1 * t.cos() + &p2 * t.sin();
        scaled = scaled.max((ctx.norm(&a.apply(&z)) / modulus - ctx.norm(&z)).abs());
    }
    Ok(PlaneRecord {
        block: index,
        auerbach,
        rotation_defect,
        scaled_isometry_residual: scaled,
    })
}

fn regroup_eigenspaces(ctx: &SipContext, nf: &mut NormalForm, both_ways: bool, tol: f64) -> Result<()> {
    let mut i = 0;
    while i < nf.blocks.len() {
        let Block::Real1D { lambda, .. } = nf.blocks[i] else {
            i += 1;
            continue;
        };
        let mut j = i + 1;
        while j < nf.blocks.len()
            && matches!(nf.blocks[j], Block::Real1D { lambda: l, .. } if (l - lambda).abs() <= 1e-9 * lambda.abs().max(1.0))
        {
            j += 1;
        }
        let cols: Vec<usize> = nf.blocks[i..j].iter().flat_map(Block::cols).collect();
        let space: Vec<Vector> = cols.iter().map(|&c| nf.basis.column(c).into_owned()).collect();
        let new = if both_ways && space.len() == 2 {
            match auerbach_pair(ctx, (&space[0], &space[1]), tol)? {
                AuerbachOutcome::Found { a, b, .. } => vec![a, b],
                AuerbachOutcome::Failed { .. } => flag_orthogonal(ctx, &space),
            }
        } else {
            flag_orthogonal(ctx, &space)
        };
        for (c, v) in cols.into_iter().zip(new) {
            nf.basis.set_column(c, &v);
        }
        i = j;
    }
    Ok(())
}

/// Normal form of an isometry: `+1` eigenblocks, then `−1` eigenblocks, then
/// generalized rotations, with mutual orthogonality residuals and one
/// Auerbach record per rotation block.
pub fn isometry_normal_form(ctx: &SipContext, u: &LinearOperator, tol: f64) -> Result<VerifiedNormalForm> {
    if !ctx.model().is_smooth() {
        return Err(Error::Unsupported {
            op: "isometry_normal_form",
            gate: "classify",
            reason: "orthogonality records need the semi-inner product of a smooth model".into(),
        });
    }
    let pre = is_isometry(ctx, u, Sampling::default(), tol.max(1e-9))?;
    if !pre.verdict {
        return Err(Error::Precondition(format!(
            "operator is not an isometry (residual {:e})",
            pre.max_residual
        )));
    }
    let mut nf = real_block_decomposition(u, tol)?;
    for b in &nf.blocks {
        let bad = match *b {
            Block::Real1D { lambda, .. } => (lambda.abs() - 1.0).abs() > tol,
            Block::Plane2D { modulus, .. } => (modulus - 1.0).abs() > tol,
        };
        if bad {
            return Err(Error::numeric("isometry block has modulus different from 1", f64::NAN));
        }
    }
    for b in nf.blocks.iter_mut() {
        match b {
            Block::Real1D { lambda, .. } => *lambda = lambda.signum(),
            Block::Plane2D { modulus, .. } => *modulus = 1.0,
        }
    }
    regroup_eigenspaces(ctx, &mut nf, true, tol)?;
    let nf = finish(nf.basis, nf.blocks, u.matrix(), tol)?;
    let orthogonality = block_orthogonality(ctx, &nf, true)?;
    let planes = (0..nf.blocks.len())
        .filter(|&k| matches!(nf.blocks[k], Block::Plane2D { .. }))
        .map(|k| plane_record(ctx, u, &nf, k, tol))
        .collect::<Result<Vec<_>>>()?;
    let count = |pred: fn(&Block) -> bool| nf.blocks.iter().filter(|b| pred(b)).count();
    Ok(VerifiedNormalForm {
        fixed_count: count(|b| matches!(b, Block::Real1D { lambda, .. } if *lambda > 0.0)),
        reflected_count: count(|b| matches!(b, Block::Real1D { lambda, .. } if *lambda < 0.0)),
        plane_count: count(|b| matches!(b, Block::Plane2D { .. })),
        normal_form: nf,
        orthogonality,
        planes,
    })
}

/// Normal form of an adjoint-abelian operator with the flag property
/// `[v, u] = 0` for `u` in an earlier block and `v` in a later one.
pub fn adjoint_abelian_normal_form(ctx: &SipContext, a: &LinearOperator, tol: f64) -> Result<VerifiedNormalForm> {
    let pre = is_adjoint_abelian(ctx, a, Sampling::default(), tol.max(1e-9))?;
    if !pre.verdict {
        return Err(Error::Precondition(format!(
            "operator is not adjoint abelian (residual {:e})",
            pre.max_residual
        )));
    }
    let mut nf = real_block_decomposition(a, tol)?;
    regroup_eigenspaces(ctx, &mut nf, false, tol)?;
    let nf = finish(nf.basis, nf.blocks, a.matrix(), tol)?;
    let orthogonality = block_orthogonality(ctx, &nf, false)?;
    let planes = (0..nf.blocks.len())
        .filter(|&k| matches!(nf.blocks[k], Block::Plane2D { .. }))
        .map(|k| plane_record(ctx, a, &nf, k, tol))
        .collect::<Result<Vec<_>>>()?;
    let count = |pred: fn(&Block) -> bool| nf.blocks.iter().filter(|b| pred(b)).count();
    Ok(VerifiedNormalForm {
        fixed_count: count(|b| matches!(b, Block::Real1D { lambda, .. } if *lambda > 0.0)),
        reflected_count: count(|b| matches!(b, Block::Real1D { lambda, .. } if *lambda < 0.0)),
        plane_count: count(|b| matches!(b, Block::Plane2D { .. })),
        normal_form: nf,
        orthogonality,
        planes,
    })
}
