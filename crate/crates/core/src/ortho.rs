//! Birkhoff and James orthogonality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bisect_root, golden_section, Vector};
use crate::sip::{Side, SipContext};

pub const GOLDEN_ITERS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoResult {
    pub orthogonal: bool,
    /// `min_t ‖x+ty‖ − ‖x‖`; zero when `x ⊥_B y`, negative otherwise.
    pub margin: f64,
    pub minimizer_t: f64,
    /// Whether `ρ'₋(x,y) ≤ 0 ≤ ρ'₊(x,y)` gives the same verdict.
    pub derivative_agrees: bool,
}

fn nonzero(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|&c| c == 0.0) {
        Err(Error::input(format!("{what} must be nonzero")))
    } else if !v.iter().all(|c| c.is_finite()) {
        Err(Error::input(format!("{what} has non-finite entries")))
    } else {
        Ok(())
    }
}

/// `x ⊥_B y`: `‖x + ty‖ ≥ ‖x‖` for all real `t`.
pub fn birkhoff(ctx: &SipContext, x: &Vector, y: &Vector, tol: f64) -> Result<OrthoResult> {
    let model = ctx.model();
    model.check_dim(x)?;
    model.check_dim(y)?;
    nonzero(x, "x")?;
    nonzero(y, "y")?;
    let nx = ctx.norm(x);
    let ny = ctx.norm(y);
    let f = |t: f64| ctx.norm(&(x + y * t));
    let half = 10.0 * nx / ny;
    let (mut t, mut ft) = golden_section(f, -half, half, GOLDEN_ITERS);
    // flat bottoms (polytopes) may contain 0 without the search landing on it
    if nx <= ft + tol * nx.max(1.0) {
        t = 0.0;
        ft = nx;
    }
    let orthogonal = t.abs() <= tol;
    let slack = 1e-9 * nx * ny;
    let plus = ctx.rho(x, y, Side::Plus);
    let minus = ctx.rho(x, y, Side::Minus);
    let by_derivative = minus <= slack && plus >= -slack;
    Ok(OrthoResult {
        orthogonal,
        margin: ft - nx,
        minimizer_t: t,
        derivative_agrees: by_derivative == orthogonal,
    })
}

fn require_strict(ctx: &SipContext, op: &'static str) -> Result<()> {
    if ctx.model().is_strictly_convex() {
        Ok(())
    } else {
        Err(Error::Unsupported {
            op,
            gate: "classify",
            reason: "Birkhoff-orthogonal directions are unique only in strictly convex planes".into(),
        })
    }
}

/// The unit direction `d` with `d ⊥_B g` in a strictly convex plane,
/// oriented so that `det[g d] > 0`.
pub fn birkhoff_direction(ctx: &SipContext, g: &Vector, tol: f64) -> Result<Vector> {
    require_strict(ctx, "birkhoff_direction")?;
    if ctx.dim() != 2 {
        return Err(Error::input(format!("birkhoff_direction needs a plane, got dimension {}", ctx.dim())));
    }
    ctx.model().check_dim(g)?;
    nonzero(g, "g")?;
    let e1 = crate::linalg::basis(2, 0);
    let e2 = crate::linalg::basis(2, 1);
    let d = birkhoff_direction_in_plane(ctx, g, (&e1, &e2));
    let check = birkhoff(ctx, &d, g, tol)?;
    if !check.orthogonal {
        return Err(Error::numeric("direction search did not reach Birkhoff orthogonality", check.minimizer_t.abs()));
    }
    Ok(d)
}

/// Unit `d` in `span(q1, q2)` (Euclidean-orthonormal) with `ρ'₊(d, g) = 0`,
/// taken on the half-turn from `g` in the `q1 → q2` sense.
pub(crate) fn birkhoff_direction_in_plane(ctx: &SipContext, g: &Vector, plane: (&Vector, &Vector)) -> Vector {
    let (q1, q2) = plane;
    let theta_g = g.dot(q2).atan2(g.dot(q1));
    let dir = |theta: f64| q1 * theta.cos() + q2 * theta.sin();
    let f = |theta: f64| ctx.rho(&dir(theta), g, Side::Plus);
    let theta = bisect_root(f, theta_g, theta_g + std::f64::consts::PI, 200);
    let d = dir(theta);
    let n = ctx.norm(&d);
    d / n
}

/// James orthogonality: `‖x+y‖ = ‖x−y‖` within `tol`.
pub fn james(ctx: &SipContext, x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
    ctx.model().check_dim(x)?;
    ctx.model().check_dim(y)?;
    Ok((ctx.norm(&(x + y)) - ctx.norm(&(x - y))).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_vector, rng};
    use crate::normspace::NormModel;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    fn lp(p: f64) -> SipContext {
        SipContext::new(NormModel::lp(p, 2).unwrap())
    }

    // independent 1-D minimizer: dense scan then local refinement
    fn scan_minimizer(ctx: &SipContext, x: &Vector, y: &Vector) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for k in -4000..=4000 {
            let t = k as f64 * 1e-3;
            let v = ctx.norm(&(x + y * t));
            if v < best.0 {
                best = (v, t);
            }
        }
        best.1
    }

    #[test]
    fn examples() {
        let c = lp(2.0);
        assert!(birkhoff(&c, &dvector![1.0, 0.0], &dvector![0.0, 1.0], DEFAULT_TOL).unwrap().orthogonal);
        let c = lp(4.0);
        let r = birkhoff(&c, &dvector![1.0, 1.0], &dvector![1.0, -1.0], DEFAULT_TOL).unwrap();
        assert!(r.orthogonal && r.derivative_agrees);
        let x = dvector![1.0, 0.0];
        let y = dvector![1.0, 1.0];
        let r = birkhoff(&c, &x, &y, DEFAULT_TOL).unwrap();
        assert!(!r.orthogonal && r.derivative_agrees);
        assert!(r.minimizer_t < 0.0);
        assert!((r.minimizer_t - scan_minimizer(&c, &x, &y)).abs() < 2e-3);
        assert!(birkhoff(&c, &dvector![0.0, 0.0], &y, DEFAULT_TOL).is_err());
    }

    #[test]
    fn polytope_flat_bottom() {
        let c = SipContext::new(NormModel::named_polytope("square").unwrap());
        // x on the right edge, y along it: every small t leaves the norm at 1
        let r = birkhoff(&c, &dvector![1.0, 0.0], &dvector![0.0, 1.0], DEFAULT_TOL).unwrap();
        assert!(r.orthogonal && r.derivative_agrees);
        assert!(birkhoff_direction(&c, &dvector![1.0, 0.0], DEFAULT_TOL).is_err());
    }

    #[test]
    fn direction_examples() {
        let d = birkhoff_direction(&lp(2.0), &dvector![1.0, 0.0], DEFAULT_TOL).unwrap();
        assert!((d - dvector![0.0, 1.0]).norm() < 1e-12);
        let d = birkhoff_direction(&lp(4.0), &dvector![1.0, 1.0], DEFAULT_TOL).unwrap();
        // d1³ + d2³ = 0 and det[g d] > 0
        assert!((d[0] + d[1]).abs() < 1e-12 && d[1] > 0.0);
        let g = dmatrix![2.0, 0.5; 0.5, 1.0];
        let c = SipContext::new(NormModel::quadratic(g.clone()).unwrap());
        let v = dvector![0.3, -1.2];
        let d = birkhoff_direction(&c, &v, DEFAULT_TOL).unwrap();
        let gv = &g * &v;
        let expect = dvector![-gv[1], gv[0]];
        assert!((d[0] * expect[1] - d[1] * expect[0]).abs() < 1e-12);
        assert!(d.dot(&expect) > 0.0);
    }

    #[test]
    fn unique_direction_by_sign_changes() {
        for p in [1.3, 3.0, 7.0] {
            let c = lp(p);
            let g = dvector![0.8, -0.35];
            let d = birkhoff_direction(&c, &g, DEFAULT_TOL).unwrap();
            let f = |k: usize| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / 720.0;
                c.rho(&dvector![t.cos(), t.sin()], &g, Side::Plus)
            };
            let changes = (0..720).filter(|&k| f(k).signum() != f((k + 1) % 720).signum()).count();
            assert_eq!(changes, 2, "p = {p}");
            assert!(birkhoff(&c, &d, &g, DEFAULT_TOL).unwrap().orthogonal);
            assert!(birkhoff(&c, &(-&d), &g, DEFAULT_TOL).unwrap().orthogonal);
        }
    }

    #[test]
    fn james_examples() {
        let c = lp(4.0);
        assert!(james(&c, &dvector![0.2, 0.7], &dvector![0.0, 0.0], 1e-12).unwrap());
        assert!(james(&lp(2.0), &dvector![1.0, 0.0], &dvector![0.0, 1.0], 1e-12).unwrap());
        let x = dvector![1.0, 0.3];
        let y = dvector![-0.3, 1.0];
        let direct = (crate::normspace::lp_norm(&[0.7, 1.3], 4.0) - crate::normspace::lp_norm(&[1.3, -0.7], 4.0)).abs();
        assert_eq!(james(&c, &x, &y, 1e-12).unwrap(), direct <= 1e-12);
        // the two relations genuinely differ here
        assert_ne!(james(&c, &x, &y, 1e-9).unwrap(), birkhoff(&c, &x, &y, DEFAULT_TOL).unwrap().orthogonal);
    }

    #[test]
    fn euclidean_coincidence() {
        let c = lp(2.0);
        let mut r = rng(11);
        for k in 0..200 {
            let x = gaussian_vector(&mut r, 2);
            let y = if k % 2 == 0 {
                gaussian_vector(&mut r, 2)
            } else {
                dvector![-x[1], x[0]] * 0.7
            };
            let dot = x.dot(&y).abs() <= 1e-9;
            let b = birkhoff(&c, &x, &y, 1e-7).unwrap().orthogonal;
            assert_eq!(b, dot, "pair {k}");
            assert_eq!(james(&c, &x, &y, 1e-9).unwrap(), dot, "pair {k}");
        }
    }

    proptest! {
        #[test]
        fn homogeneous_verdict(a in 0.1f64..10.0, b in 0.1f64..10.0, t in 0.0f64..std::f64::consts::TAU) {
            let c = lp(3.0);
            let g = dvector![t.cos(), t.sin()];
            let d = birkhoff_direction(&c, &g, DEFAULT_TOL).unwrap();
            prop_assert!(birkhoff(&c, &(&d * a), &(&g * b), 1e-8).unwrap().orthogonal);
            let off = dvector![d[0] + 0.2 * g[0], d[1] + 0.2 * g[1]];
            let r1 = birkhoff(&c, &off, &g, 1e-8).unwrap().orthogonal;
            let r2 = birkhoff(&c, &(&off * a), &(&g * b), 1e-8).unwrap().orthogonal;
            prop_assert_eq!(r1, r2);
        }
    }
}
