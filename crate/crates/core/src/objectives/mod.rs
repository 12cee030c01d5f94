//! Per-agent convex objectives with certified smoothness and strong-convexity
//! constants, plus a reference minimizer of their average.

mod data;
mod minimizer;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling;
use crate::scalar::Scalar;

pub use data::LabeledDataset;
pub use minimizer::{accelerated_descent, global_minimizer, Minimizer, MinimizerOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteKind {
    Quadratic,
    Logistic,
}

#[derive(Clone, Debug)]
enum Parts<T: Scalar> {
    /// `f_i(x) = ½ xᵀH_i x − b_iᵀx`.
    Quadratic { hessians: Vec<DMatrix<T>>, linear: Vec<DVector<T>> },
    /// `f_i(x) = Σ_j log(1 + exp(−λ_j z_jᵀx)) + (μ/2)‖x‖²` over agent i's shard.
    Logistic { shards: Vec<LabeledDataset<T>>, penalty: T },
}

/// `n` local objectives `f_i : ℝ^dim → ℝ`, all convex and `L`-smooth, and
/// `mu`-strongly convex when `mu > 0`. The global objective is their average.
#[derive(Clone, Debug)]
pub struct ObjectiveSuite<T: Scalar> {
    n: usize,
    dim: usize,
    smoothness: T,
    strong_convexity: T,
    parts: Parts<T>,
}

impl<T: Scalar> ObjectiveSuite<T> {
    /// Quadratic suite from explicit symmetric positive semidefinite Hessians
    /// and linear terms; constants come from a symmetric eigensolve.
    pub fn quadratic(hessians: Vec<DMatrix<T>>, linear: Vec<DVector<T>>) -> Result<Self> {
        let n = hessians.len();
        if n == 0 || linear.len() != n {
            return Err(Error::InvalidArgument("need one Hessian and one linear term per agent".into()));
        }
        let dim = linear[0].len();
        let mut smoothness = T::zero();
        let mut strong_convexity = T::max_value().unwrap_or_else(T::one);
        for (h, b) in hessians.iter().zip(&linear) {
            if h.nrows() != dim || h.ncols() != dim || b.len() != dim {
                return Err(Error::InvalidArgument("inconsistent quadratic dimensions".into()));
            }
            if (h - h.transpose()).amax() > T::lit(1e-12) * (T::one() + h.amax()) {
                return Err(Error::InvalidArgument("Hessian is not symmetric".into()));
            }
            let ev = SymmetricEigen::new(h.clone()).eigenvalues;
            smoothness = smoothness.max(ev.max());
            strong_convexity = strong_convexity.min(ev.min());
        }
        if strong_convexity < T::zero() {
            return Err(Error::InvalidArgument("Hessian is not positive semidefinite".into()));
        }
        Ok(ObjectiveSuite { n, dim, smoothness, strong_convexity, parts: Parts::Quadratic { hessians, linear } })
    }

    /// Random quadratic suite whose Hessians share an eigenbasis and have
    /// spectra in `[mu_base, mu_base·kappa]`, both endpoints attained by every
    /// agent when `dim ≥ 2`. Local minimizers are standard normal.
    pub fn random_quadratic(n: usize, dim: usize, kappa: T, mu_base: T, seed: u64) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidArgument("n and dim must be positive".into()));
        }
        if !(kappa >= T::one()) || !(mu_base > T::zero()) {
            return Err(Error::InvalidArgument(format!("need kappa >= 1 and mu_base > 0, got {kappa}, {mu_base}")));
        }
        let mut rng = sampling::rng(seed);
        let basis = sampling::gaussian_matrix::<T>(dim, dim, &mut rng).qr().q();
        let top = mu_base * kappa;
        let log_kappa = kappa.ln();
        let mut hessians = Vec::with_capacity(n);
        let mut linear = Vec::with_capacity(n);
        let mut smoothness = T::zero();
        let mut strong_convexity = top;
        for i in 0..n {
            let spectrum = DVector::from_fn(dim, |j, _| {
                if dim == 1 {
                    let frac = if n == 1 { T::zero() } else { T::of_usize(i) / T::of_usize(n - 1) };
                    mu_base * (frac * log_kappa).exp()
                } else if j == 0 {
                    mu_base
                } else if j == dim - 1 {
                    top
                } else {
                    mu_base * (T::lit(rng.random::<f64>()) * log_kappa).exp()
                }
            });
            smoothness = smoothness.max(spectrum.max());
            strong_convexity = strong_convexity.min(spectrum.min());
            let h = &basis * DMatrix::from_diagonal(&spectrum) * basis.transpose();
            let h = (&h + h.transpose()) / T::lit(2.0);
            let local_min = sampling::gaussian_vector::<T>(dim, &mut rng);
            linear.push(&h * local_min);
            hessians.push(h);
        }
        Ok(ObjectiveSuite { n, dim, smoothness, strong_convexity, parts: Parts::Quadratic { hessians, linear } })
    }

    /// Regularized logistic suite: rows shuffled with `partition_seed` and
    /// dealt into `n` shards whose sizes differ by at most one.
    pub fn logistic(data: &LabeledDataset<T>, n: usize, mu: T, partition_seed: u64) -> Result<Self> {
        if n == 0 || n > data.len() {
            return Err(Error::InvalidArgument(format!("cannot split {} rows over {n} agents", data.len())));
        }
        if !(mu >= T::zero()) {
            return Err(Error::InvalidArgument(format!("penalty must be nonnegative, got {mu}")));
        }
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut sampling::rng(partition_seed));
        let base = data.len() / n;
        let extra = data.len() % n;
        let mut shards = Vec::with_capacity(n);
        let mut start = 0;
        for i in 0..n {
            let len = base + usize::from(i < extra);
            shards.push(data.select(&idx[start..start + len]));
            start += len;
        }
        let quarter = T::lit(0.25);
        let smoothness =
            shards.iter().map(|s| quarter * s.features().norm_squared()).fold(T::zero(), |a, b| a.max(b)) + mu;
        Ok(ObjectiveSuite {
            n,
            dim: data.dim(),
            smoothness,
            strong_convexity: mu,
            parts: Parts::Logistic { shards, penalty: mu },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gradient-Lipschitz constant `L` valid for every local objective.
    pub fn smoothness(&self) -> T {
        self.smoothness
    }

    /// Strong-convexity modulus `mu` valid for every local objective (0 if merely convex).
    pub fn strong_convexity(&self) -> T {
        self.strong_convexity
    }

    pub fn kind(&self) -> SuiteKind {
        match self.parts {
            Parts::Quadratic { .. } => SuiteKind::Quadratic,
            Parts::Logistic { .. } => SuiteKind::Logistic,
        }
    }

    /// Agent shards of a logistic suite.
    pub fn shards(&self) -> Option<&[LabeledDataset<T>]> {
        match &self.parts {
            Parts::Logistic { shards, .. } => Some(shards),
            Parts::Quadratic { .. } => None,
        }
    }

    /// Hessians and linear terms of a quadratic suite.
    #[allow(clippy::type_complexity)]
    pub fn quadratic_parts(&self) -> Option<(&[DMatrix<T>], &[DVector<T>])> {
        match &self.parts {
            Parts::Quadratic { hessians, linear } => Some((hessians, linear)),
            Parts::Logistic { .. } => None,
        }
    }

    pub fn value(&self, agent: usize, x: &DVector<T>) -> T {
        match &self.parts {
            Parts::Quadratic { hessians, linear } => {
                T::lit(0.5) * x.dot(&(&hessians[agent] * x)) - linear[agent].dot(x)
            }
            Parts::Logistic { shards, penalty } => {
                let shard = &shards[agent];
                let margins = shard.features() * x;
                let loss = margins.iter().zip(shard.labels()).fold(T::zero(), |acc, (&m, &l)| acc + softplus(-l * m));
                loss + *penalty * T::lit(0.5) * x.norm_squared()
            }
        }
    }

    pub fn gradient(&self, agent: usize, x: &DVector<T>) -> DVector<T> {
        match &self.parts {
            Parts::Quadratic { hessians, linear } => &hessians[agent] * x - &linear[agent],
            Parts::Logistic { shards, penalty } => {
                let shard = &shards[agent];
                let margins = shard.features() * x;
                let weights = DVector::from_iterator(
                    margins.len(),
                    margins.iter().zip(shard.labels()).map(|(&m, &l)| -l * sigmoid(-l * m)),
                );
                shard.features().transpose() * weights + x * *penalty
            }
        }
    }

    /// Row `i` of the result is `∇f_i(u_i)ᵀ`, with `u_i` the `i`-th row of `u`.
    pub fn stacked_gradient(&self, u: &DMatrix<T>) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.n, self.dim);
        for i in 0..self.n {
            let g = self.gradient(i, &u.row(i).transpose());
            out.row_mut(i).copy_from(&g.transpose());
        }
        out
    }

    /// `f_i(x) − f_i(x_ref)` evaluated without cancelling against the size
    /// of `f_i(x_ref)`, accurate down to differences far below `ε·|f_i|`.
    pub fn value_gap(&self, agent: usize, x: &DVector<T>, x_ref: &DVector<T>) -> T {
        let e = x - x_ref;
        match &self.parts {
            Parts::Quadratic { hessians, linear } => {
                let h = &hessians[agent];
                (h * x_ref - &linear[agent]).dot(&e) + T::lit(0.5) * e.dot(&(h * &e))
            }
            Parts::Logistic { shards, penalty } => {
                let shard = &shards[agent];
                let m_ref = shard.features() * x_ref;
                let dm = shard.features() * &e;
                let loss = dm
                    .iter()
                    .zip(m_ref.iter())
                    .zip(shard.labels())
                    .fold(T::zero(), |acc, ((&d, &b), &l)| acc + softplus_increment(-l * b, -l * d));
                loss + *penalty * T::lit(0.5) * e.dot(&(x + x_ref))
            }
        }
    }

    /// `f(x) − f(x_ref)` for the average objective, see [`Self::value_gap`].
    pub fn average_value_gap(&self, x: &DVector<T>, x_ref: &DVector<T>) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.value_gap(i, x, x_ref)) / T::of_usize(self.n)
    }

    /// Global objective `f(x) = (1/n) Σ_i f_i(x)`.
    pub fn average_value(&self, x: &DVector<T>) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.value(i, x)) / T::of_usize(self.n)
    }

    pub fn average_gradient(&self, x: &DVector<T>) -> DVector<T> {
        let mut g = DVector::zeros(self.dim);
        for i in 0..self.n {
            g += self.gradient(i, x);
        }
        g / T::of_usize(self.n)
    }
}

fn softplus<T: Scalar>(t: T) -> T {
    t.max(T::zero()) + (-t.abs()).exp().ln_1p()
}

/// `softplus(b + d) − softplus(b) = ln(1 + σ(b)·(e^d − 1))`.
fn softplus_increment<T: Scalar>(b: T, d: T) -> T {
    if d > T::lit(30.0) {
        return softplus(b + d) - softplus(b);
    }
    (sigmoid(b) * d.exp_m1()).ln_1p()
}

fn sigmoid<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}
