//! Norm derivatives, the induced semi-inner product, the duality map and
//! its inverse.
//!
//! Argument convention: `sip(u, v)` is `[u, v]`, linear in `u` and
//! norm-defining in `v`; it equals `rho_plus(v, u)`.

use crate::error::{Error, Result};
use crate::linalg::{basis, Matrix, Vector};
use crate::normspace::NormModel;

// relative slack for deciding which facets attain the gauge at x
const ACTIVE_FACET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SipContext {
    model: NormModel,
    fd_step: f64,
    tol: f64,
}

impl SipContext {
    pub const DEFAULT_FD_STEP: f64 = 1e-5;
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(model: NormModel) -> Self {
        SipContext {
            model,
            fd_step: Self::DEFAULT_FD_STEP,
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_params(model: NormModel, fd_step: f64, tol: f64) -> Result<Self> {
        if !(1e-10..=1e-3).contains(&fd_step) {
            return Err(Error::input(format!("fd_step {fd_step:e} outside [1e-10, 1e-3]")));
        }
        if !(tol >= 1e-12) {
            return Err(Error::input(format!("tol {tol:e} below 1e-12")));
        }
        Ok(SipContext { model, fd_step, tol })
    }

    pub fn model(&self) -> &NormModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.model.eval(x)
    }

    fn check_pair(&self, x: &Vector, y: &Vector) -> Result<()> {
        self.model.check_dim(x)?;
        self.model.check_dim(y)
    }

    fn require_smooth(&self, op: &'static str) -> Result<()> {
        if self.model.is_smooth() {
            Ok(())
        } else {
            Err(Error::Unsupported {
                op,
                gate: "classify",
                reason: "the semi-inner product is unique only on smooth models".into(),
            })
        }
    }

    pub fn rho_plus(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.rho(x, y, Side::Plus))
    }

    pub fn rho_minus(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.rho(x, y, Side::Minus))
    }

    /// Norm derivative `lim_{t→±0} (‖x+ty‖² − ‖x‖²)/(2t)` without input
    /// validation. Every model has a closed form: the power-sum gradient for
    /// `l_p`, the bilinear form for quadratic norms, and the extreme slope
    /// over the active facets for polytopes. [`SipContext::rho_fd`] is the
    /// model-independent cross-check.
    pub fn rho(&self, x: &Vector, y: &Vector, side: Side) -> f64 {
        if x.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        match &self.model {
            NormModel::Lp(l) => {
                let n = self.model.eval(x);
                let p = l.p();
                n * x
                    .iter()
                    .zip(y.iter())
                    .map(|(&xi, &yi)| (xi.abs() / n).powf(p - 1.0) * xi.signum() * yi)
                    .sum::<f64>()
            }
            NormModel::Quadratic(q) => x.dot(&(q.gram() * y)),
            NormModel::Polytopal(poly) => {
                let n = self.model.eval(x);
                let slopes = poly.active_facets(x, ACTIVE_FACET_TOL).into_iter().map(|a| a.dot(y));
                let slope = match side {
                    Side::Plus => slopes.fold(f64::MIN, f64::max),
                    Side::Minus => slopes.fold(f64::MAX, f64::min),
                };
                n * slope
            }
        }
    }

    /// One-sided finite difference of `‖x+ty‖²/2` at `t = 0` with two
    /// Richardson steps (h, h/2, h/4). Valid on every model.
    pub fn rho_fd(&self, x: &Vector, y: &Vector, side: Side) -> f64 {
        let nx = self.model.eval(x);
        if nx == 0.0 {
            return 0.0;
        }
        let ny = self.model.eval(y);
        if ny == 0.0 {
            return 0.0;
        }
        let h = self.fd_step * nx.max(1.0) / ny.max(1.0);
        let s = side.sign();
        let d = |t: f64| {
            let nt = self.model.eval(&(x + y * (s * t)));
            (nt - nx) * (nt + nx) / (2.0 * s * t)
        };
        (8.0 * d(h / 4.0) - 6.0 * d(h / 2.0) + d(h)) / 3.0
    }

    /// The semi-inner product `[u, v]`.
    pub fn sip(&self, u: &Vector, v: &Vector) -> Result<f64> {
        self.require_smooth("sip")?;
        self.check_pair(u, v)?;
        Ok(self.rho(v, u, Side::Plus))
    }

    /// Unchecked `[u, v]` for hot loops on a model already known to be smooth.
    pub(crate) fn sip_raw(&self, u: &Vector, v: &Vector) -> f64 {
        self.rho(v, u, Side::Plus)
    }

    /// Coefficients of the functional `x ↦ [x, y]`.
    pub fn duality_map(&self, y: &Vector) -> Result<Vector> {
        self.require_smooth("duality_map")?;
        self.model.check_dim(y)?;
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::input("duality map is evaluated at a nonzero vector"));
        }
        Ok(self.duality_raw(y))
    }

    pub(crate) fn duality_raw(&self, y: &Vector) -> Vector {
        match &self.model {
            NormModel::Quadratic(q) => q.gram() * y,
            _ => {
                let n = self.dim();
                Vector::from_iterator(n, (0..n).map(|i| self.sip_raw(&basis(n, i), y)))
            }
        }
    }

    /// The unique `y` with `[x, y] = c·x` for all `x`.
    pub fn riesz_representer(&self, c: &Vector) -> Result<Vector> {
        self.require_smooth("riesz_representer")?;
        self.model.check_dim(c)?;
        if c.iter().all(|&v| v == 0.0) {
            return Err(Error::input("Riesz representer of the zero functional is requested"));
        }
        let y = match &self.model {
            NormModel::Lp(l) => {
                let q = l.q();
                let w = c.map(|ci| ci.signum() * ci.abs().powf(q - 1.0));
                let nw = self.model.eval(&w);
                w * nw.powf(l.p() - 2.0)
            }
            NormModel::Quadratic(q) => q.gram_inverse() * c,
            NormModel::Polytopal(_) => unreachable!("gated by require_smooth"),
        };
        let residual = (self.duality_raw(&y) - c).amax();
        if residual > 1e-8 * c.amax().max(1.0) {
            return Err(Error::numeric("Riesz representer does not reproduce the functional", residual));
        }
        Ok(y)
    }

    /// Damped Newton iteration on the duality map with a finite-difference
    /// Jacobian, starting from `c` itself. Model independent.
    pub fn riesz_newton(&self, c: &Vector) -> Result<Vector> {
        self.require_smooth("riesz_representer")?;
        self.model.check_dim(c)?;
        if c.iter().all(|&v| v == 0.0) {
            return Err(Error::input("Riesz representer of the zero functional is requested"));
        }
        let n = self.dim();
        let target = 1e-8 * c.amax().max(1.0);
        let mut y = c.clone();
        let mut f = self.duality_raw(&y) - c;
        for _ in 0..200 {
            let res = f.amax();
            if res <= target {
                return Ok(y);
            }
            let h = 1e-7 * y.amax().max(1e-3);
            let mut jac = Matrix::zeros(n, n);
            for j in 0..n {
                let mut yp = y.clone();
                yp[j] += h;
                let mut ym = y.clone();
                ym[j] -= h;
                let col = (self.duality_raw(&yp) - self.duality_raw(&ym)) / (2.0 * h);
                jac.set_column(j, &col);
            }
            let step = jac
                .lu()
                .solve(&f)
                .ok_or_else(|| Error::numeric("singular duality-map Jacobian", res))?;
            let mut lambda = 1.0;
            loop {
                let cand = &y - &step * lambda;
                let fc = self.duality_raw(&cand) - c;
                if fc.amax() < res || lambda < 1e-6 {
                    y = cand;
                    f = fc;
                    break;
                }
                lambda *= 0.5;
            }
        }
        let res = f.amax();
        if res <= target {
            Ok(y)
        } else {
            Err(Error::numeric("Newton iteration on the duality map did not converge in 200 steps", res))
        }
    }
}
