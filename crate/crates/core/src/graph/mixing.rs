use nalgebra::{DMatrix, DVector};

use super::DirectedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-stochastic mixing matrix with its Perron vector and the spectral
/// radius `sigma` of `C - p 1ᵀ / n`.
///
/// Column `j` belongs to sender `j`: `C[(i, j)]` is the share of agent `j`'s
/// mass pushed to agent `i`.
#[derive(Clone, Debug)]
pub struct MixingMatrix<T: Scalar> {
    c: DMatrix<T>,
    p: DVector<T>,
    sigma: T,
}

#[derive(Clone, Copy, Debug)]
pub struct PerronOptions {
    pub tol: f64,
    /// `None` selects `100 n ln n + 10⁴`.
    pub max_iter: Option<usize>,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions { tol: 1e-12, max_iter: None }
    }
}

impl<T: Scalar> MixingMatrix<T> {
    /// Each sender splits its mass evenly over itself and its out-neighbours.
    pub fn uniform_out_weights(g: &DirectedGraph) -> Result<Self> {
        if !g.is_strongly_connected() {
            return Err(Error::NotStronglyConnected);
        }
        let n = g.n();
        let mut c = DMatrix::zeros(n, n);
        for j in 0..n {
            let w = T::one() / T::of_usize(g.out_degree(j) + 1);
            c[(j, j)] = w;
            for i in g.out_neighbors(j) {
                c[(i, j)] = w;
            }
        }
        Self::from_matrix(c)
    }

    /// Validates a user-supplied column-stochastic matrix and computes its
    /// Perron vector and contraction factor.
    pub fn from_matrix(c: DMatrix<T>) -> Result<Self> {
        Self::from_matrix_with(c, PerronOptions::default())
    }

    pub fn from_matrix_with(c: DMatrix<T>, opts: PerronOptions) -> Result<Self> {
        if !c.is_square() || c.nrows() == 0 {
            return Err(Error::InvalidMixing(format!("{}x{} is not a nonempty square matrix", c.nrows(), c.ncols())));
        }
        if c.iter().any(|&x| x < T::zero() || !x.is_finite_value()) {
            return Err(Error::InvalidMixing("entries must be finite and nonnegative".into()));
        }
        let col_tol = T::lit(1e3) * T::unit_roundoff() * T::of_usize(c.nrows());
        for (j, col) in c.column_iter().enumerate() {
            let s = col.sum();
            if (s - T::one()).abs() > col_tol {
                return Err(Error::InvalidMixing(format!("column {j} sums to {s}")));
            }
        }
        let p = perron_vector(&c, opts)?;
        let sigma = contraction_factor(&c, &p)?;
        Ok(MixingMatrix { c, p, sigma })
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.c
    }

    pub fn perron(&self) -> &DVector<T> {
        &self.p
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// `C - p 1ᵀ / n`, the error-propagation map of the mixing step.
    pub fn deviation(&self) -> DMatrix<T> {
        deviation_matrix(&self.c, &self.p)
    }

    /// `Π = I - p 1ᵀ / n`.
    pub fn projector(&self) -> DMatrix<T> {
        let n = self.n();
        DMatrix::identity(n, n) - &self.p * DVector::repeat(n, T::one() / T::of_usize(n)).transpose()
    }

    pub fn max_column_sum_error(&self) -> T {
        self.c.column_iter().map(|col| (col.sum() - T::one()).abs()).fold(T::zero(), |a, b| a.max(b))
    }
}

fn deviation_matrix<T: Scalar>(c: &DMatrix<T>, p: &DVector<T>) -> DMatrix<T> {
    let n = c.nrows();
    c - p * DVector::repeat(n, T::one() / T::of_usize(n)).transpose()
}

/// Right Perron vector of a regular column-stochastic matrix, scaled so that
/// `1ᵀp = n`, by power iteration from the all-ones vector.
///
/// Once the relative residual drops below `tol` the iteration keeps going
/// while the residual still improves, so the result sits at roundoff level.
pub fn perron_vector<T: Scalar>(c: &DMatrix<T>, opts: PerronOptions) -> Result<DVector<T>> {
    let n = c.nrows();
    let nf = T::of_usize(n);
    let cap = opts.max_iter.unwrap_or_else(|| (100.0 * n as f64 * (n as f64).ln()).ceil() as usize + 10_000);
    let tol = T::lit(opts.tol);

    let rescale = |v: DVector<T>| {
        let s = v.sum();
        v * (nf / s)
    };
    let residual = |v: &DVector<T>| (c * v - v).norm() / v.norm();

    let mut p = DVector::repeat(n, T::one());
    let mut res = residual(&p);
    let mut iter = 0;
    while res > tol {
        if iter >= cap {
            return Err(Error::NotConverged {
                what: "Perron power iteration",
                iterations: iter,
                residual: res.as_f64(),
            });
        }
        p = rescale(c * &p);
        res = residual(&p);
        iter += 1;
    }

    let mut best = (res, p.clone());
    let mut stale = 0;
    while stale < 20 && iter < cap {
        p = rescale(c * &p);
        res = residual(&p);
        iter += 1;
        if res < best.0 {
            best = (res, p.clone());
            stale = 0;
        } else {
            stale += 1;
        }
    }
    let p = best.1;
    if p.iter().any(|&x| x <= T::zero()) {
        return Err(Error::InvalidMixing("Perron vector has a nonpositive entry".into()));
    }
    Ok(p)
}

/// Spectral radius of `C - p 1ᵀ / n`, from the eigenvalues of its real Schur form.
pub fn contraction_factor<T: Scalar>(c: &DMatrix<T>, p: &DVector<T>) -> Result<T> {
    let m = deviation_matrix(c, p);
    let sigma = spectral_radius(&m);
    if !(sigma < T::one()) {
        return Err(Error::InvalidMixing(format!("contraction factor {sigma} is not below 1")));
    }
    Ok(sigma)
}

pub(crate) fn spectral_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    m.clone()
        .schur()
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re * z.re + z.im * z.im).sqrt())
        .fold(T::zero(), |a, b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn three_cycle() -> DirectedGraph {
        DirectedGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn bidirected_triangle_is_uniform() {
        let g = DirectedGraph::cycle_plus_random(3, 0, 0).unwrap();
        let w = MixingMatrix::<f64>::uniform_out_weights(&g).unwrap();
        for x in w.matrix().iter() {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-15);
        }
        for x in w.perron().iter() {
            assert_abs_diff_eq!(*x, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(w.sigma(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn directed_three_cycle_weights() {
        let w = MixingMatrix::<f64>::uniform_out_weights(&three_cycle()).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            0.5, 0.0, 0.5,
            0.5, 0.5, 0.0,
            0.0, 0.5, 0.5,
        ]);
        assert_eq!(w.matrix(), &expected);
        // (I + P)/2 for cyclic P: eigenvalues (1 + ω)/2, |.| = 1/2 off the unit root.
        assert_abs_diff_eq!(w.sigma(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_disconnected_graph() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(MixingMatrix::<f64>::uniform_out_weights(&g), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn rejects_non_stochastic_input() {
        let c = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.5]);
        assert!(MixingMatrix::<f64>::from_matrix(c).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.5, 0.5, -0.5, 0.5]);
        assert!(MixingMatrix::<f64>::from_matrix(neg).is_err());
    }

    #[test]
    fn doubly_stochastic_has_unit_perron_vector() {
        let c = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]);
        let p = perron_vector(&c, PerronOptions::default()).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn power_iteration_cap_reports_non_convergence() {
        // Reducible: mass drains into node 0 at rate 1/2 per step.
        let reducible = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.5]);
        let err = perron_vector(&reducible, PerronOptions { tol: 1e-300, max_iter: Some(5) });
        assert!(matches!(err, Err(Error::NotConverged { iterations: 5, .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let w = MixingMatrix::<f32>::uniform_out_weights(&three_cycle()).unwrap();
        assert!((w.sigma() - 0.5).abs() < 1e-5);
        assert!((w.perron().sum() - 3.0).abs() < 1e-5);
    }
}
