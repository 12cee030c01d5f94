use nalgebra::{DMatrix, DVector};

use super::{ObjectiveSuite, SuiteKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct MinimizerOptions {
    /// Stop once `‖∇f(x)‖ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions { tol: 1e-14, max_iter: 500_000 }
    }
}

/// Reference solution of `min (1/n) Σ f_i`.
#[derive(Clone, Debug)]
pub struct Minimizer<T: Scalar> {
    pub x: DVector<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
}

/// Closed form for quadratic suites, accelerated descent otherwise.
pub fn global_minimizer<T: Scalar>(suite: &ObjectiveSuite<T>, opts: MinimizerOptions) -> Result<Minimizer<T>> {
    match suite.kind() {
        SuiteKind::Quadratic => {
            let (hs, bs) = suite.quadratic_parts().expect("quadratic suite");
            let nf = T::of_usize(suite.n());
            let h = hs.iter().fold(DMatrix::zeros(suite.dim(), suite.dim()), |acc, h| acc + h) / nf;
            let b = bs.iter().fold(DVector::zeros(suite.dim()), |acc, b| acc + b) / nf;
            let x = match h.clone().cholesky() {
                Some(chol) => chol.solve(&b),
                None => h.lu().solve(&b).ok_or_else(|| Error::InvalidArgument("mean Hessian is singular".into()))?,
            };
            Ok(Minimizer {
                value: suite.average_value(&x),
                grad_norm: suite.average_gradient(&x).norm(),
                x,
                iterations: 0,
            })
        }
        SuiteKind::Logistic => accelerated_descent(suite, &DVector::zeros(suite.dim()), opts),
    }
}

/// Nesterov's method with step `1/L` on the average objective, restarting the
/// momentum whenever it points uphill (gradient restart).
pub fn accelerated_descent<T: Scalar>(
    suite: &ObjectiveSuite<T>,
    x0: &DVector<T>,
    opts: MinimizerOptions,
) -> Result<Minimizer<T>> {
    let step = T::one() / suite.smoothness();
    let tol = T::lit(opts.tol);
    let two = T::lit(2.0);
    let four = T::lit(4.0);

    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut t = T::one();
    let mut best = (suite.average_gradient(&x).norm(), x.clone());

    for iter in 0..opts.max_iter {
        let gy = suite.average_gradient(&y);
        let gnorm = gy.norm();
        if !gnorm.is_finite_value() {
            return Err(Error::Divergence { iteration: iter, quantity: "reference minimizer" });
        }
        if gnorm < best.0 {
            best = (gnorm, y.clone());
        }
        if gnorm <= tol {
            return Ok(Minimizer { value: suite.average_value(&y), grad_norm: gnorm, x: y, iterations: iter });
        }
        let x_next = &y - &gy * step;
        let t_next = (T::one() + (T::one() + four * t * t).sqrt()) / two;
        let momentum = (t - T::one()) / t_next;
        // Restart when the gradient and the last displacement point the same way.
        if gy.dot(&(&x_next - &x)) > T::zero() {
            t = T::one();
            y = x_next.clone();
        } else {
            y = &x_next + (&x_next - &x) * momentum;
            t = t_next;
        }
        x = x_next;
    }
    Err(Error::NotConverged { what: "reference minimizer", iterations: opts.max_iter, residual: best.0.as_f64() })
}
