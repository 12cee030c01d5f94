use crate::error::{Error, Result};
use crate::objectives::ObjectiveSuite;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Stacked per-agent iterates (row `i` belongs to agent `i`) plus push-sum weights.
#[derive(Clone, Debug)]
pub struct SolverState<T: Scalar> {
    pub(crate) x: DMatrix<T>,
    pub(crate) y: DMatrix<T>,
    pub(crate) z: DMatrix<T>,
    pub(crate) g: DMatrix<T>,
    pub(crate) v: DVector<T>,
    pub(crate) k: usize,
    pub(crate) vhat_seen: T,
    /// `∇F(V⁻¹X)` at the current iterate, reused by the next tracking update.
    pub(crate) grad: DMatrix<T>,
}

/// Checks `v0 > 0` and `1ᵀv0 = n` (relative tolerance 1e-10).
pub fn validate_weights<T: Scalar>(v0: &DVector<T>, n: usize) -> Result<()> {
    if v0.len() != n {
        return Err(Error::InvalidArgument(format!("v0 has length {}, expected {n}", v0.len())));
    }
    if v0.iter().any(|&w| !(w > T::zero()) || !w.is_finite_value()) {
        return Err(Error::InvalidArgument("v0 must be positive and finite".into()));
    }
    let nn = T::of_usize(n);
    let tol = (T::lit(1e-10) * nn).max(T::lit(8.0) * nn * T::unit_roundoff());
    if (v0.sum() - nn).abs() > tol {
        return Err(Error::InvalidArgument(format!("v0 must sum to n = {n}, got {}", v0.sum())));
    }
    Ok(())
}

/// Divides row `i` of `a` by `v[i]`.
pub fn row_scaled<T: Scalar>(a: &DMatrix<T>, v: &DVector<T>) -> DMatrix<T> {
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row /= v[i];
    }
    out
}

pub(crate) fn ensure_finite<T: Scalar>(a: &DMatrix<T>, iteration: usize, quantity: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite_value()) {
        Ok(())
    } else {
        Err(Error::Divergence { iteration, quantity })
    }
}

impl<T: Scalar> SolverState<T> {
    /// `Y = Z = X = X0`, `G = ∇F(V0⁻¹X0)`.
    pub fn new(x0: DMatrix<T>, v0: DVector<T>, suite: &ObjectiveSuite<T>) -> Result<Self> {
        let n = suite.n();
        if x0.nrows() != n || x0.ncols() != suite.dim() {
            return Err(Error::InvalidArgument(format!(
                "X0 is {}x{}, expected {n}x{}",
                x0.nrows(),
                x0.ncols(),
                suite.dim()
            )));
        }
        validate_weights(&v0, n)?;
        ensure_finite(&x0, 0, "X")?;
        let grad = suite.stacked_gradient(&row_scaled(&x0, &v0));
        ensure_finite(&grad, 0, "gradient")?;
        Ok(SolverState {
            y: x0.clone(),
            z: x0.clone(),
            g: grad.clone(),
            vhat_seen: T::one() / v0.min(),
            x: x0,
            v: v0,
            k: 0,
            grad,
        })
    }

    /// Assembles a state from arbitrary parts; the gradient cache is recomputed.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        x: DMatrix<T>,
        y: DMatrix<T>,
        z: DMatrix<T>,
        g: DMatrix<T>,
        v: DVector<T>,
        k: usize,
        suite: &ObjectiveSuite<T>,
    ) -> Result<Self> {
        let shape = (suite.n(), suite.dim());
        if [x.shape(), y.shape(), z.shape(), g.shape()].iter().any(|s| *s != shape) {
            return Err(Error::InvalidArgument("state blocks must all be n x dim".into()));
        }
        validate_weights(&v, suite.n())?;
        let grad = suite.stacked_gradient(&row_scaled(&x, &v));
        Ok(SolverState { x, y, z, g, vhat_seen: T::one() / v.min(), v, k, grad })
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<T> {
        &self.z
    }

    /// Gradient tracker.
    pub fn g(&self) -> &DMatrix<T> {
        &self.g
    }

    pub fn v(&self) -> &DVector<T> {
        &self.v
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vhat_seen(&self) -> T {
        self.vhat_seen
    }

    /// `∇F(U_k)` with `U_k = V_k⁻¹X_k`.
    pub fn local_gradients(&self) -> &DMatrix<T> {
        &self.grad
    }

    /// `U_k = V_k⁻¹X_k`, the points where gradients are evaluated.
    pub fn u(&self) -> DMatrix<T> {
        row_scaled(&self.x, &self.v)
    }

    /// `V_k⁻¹Y_k`, the per-agent output estimates.
    pub fn output(&self) -> DMatrix<T> {
        row_scaled(&self.y, &self.v)
    }

    /// Installs freshly computed blocks, checks them and refreshes `vhat_seen`.
    pub(crate) fn advance(
        &mut self,
        x: DMatrix<T>,
        y: DMatrix<T>,
        z: DMatrix<T>,
        g: DMatrix<T>,
        v: DVector<T>,
        grad: DMatrix<T>,
    ) -> Result<()> {
        let it = self.k + 1;
        ensure_finite(&x, it, "X")?;
        ensure_finite(&y, it, "Y")?;
        ensure_finite(&z, it, "Z")?;
        ensure_finite(&g, it, "G")?;
        ensure_finite(&grad, it, "gradient")?;
        let vmin = v.min();
        if !(vmin > T::zero()) {
            return Err(Error::Divergence { iteration: it, quantity: "v" });
        }
        self.vhat_seen = self.vhat_seen.max(T::one() / vmin);
        self.x = x;
        self.y = y;
        self.z = z;
        self.g = g;
        self.v = v;
        self.grad = grad;
        self.k = it;
        Ok(())
    }
}
