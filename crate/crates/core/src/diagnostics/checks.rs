use super::metrics::column_average;
use crate::graph::{MixingMatrix, NormTransform};
use crate::objectives::ObjectiveSuite;
use crate::optimizers::SolverState;
use crate::sampling::{gaussian_vector, rng};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Relative tolerance below which a negative slack counts as a violation.
pub const INEQUALITY_TOLERANCE: f64 = 1e-8;

/// Outcome of evaluating an inequality `lhs ≤ rhs` several times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub trials: usize,
    /// Smallest `rhs − lhs` seen.
    pub min_slack: f64,
    /// Smallest `(rhs − lhs) / (1 + |lhs| + |rhs|)` seen.
    pub min_relative_slack: f64,
    /// Trials with relative slack below `−INEQUALITY_TOLERANCE`.
    pub violations: usize,
}

impl InequalityReport {
    fn empty() -> Self {
        InequalityReport { trials: 0, min_slack: f64::INFINITY, min_relative_slack: f64::INFINITY, violations: 0 }
    }

    fn add(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        let rel = slack / (1.0 + lhs.abs() + rhs.abs());
        self.trials += 1;
        self.min_slack = self.min_slack.min(slack);
        self.min_relative_slack = self.min_relative_slack.min(rel);
        if rel < -INEQUALITY_TOLERANCE || !rel.is_finite() {
            self.violations += 1;
        }
    }

    pub fn merge(&mut self, other: &InequalityReport) {
        self.trials += other.trials;
        self.min_slack = self.min_slack.min(other.min_slack);
        self.min_relative_slack = self.min_relative_slack.min(other.min_relative_slack);
        self.violations += other.violations;
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl Default for InequalityReport {
    fn default() -> Self {
        Self::empty()
    }
}

fn spread<T: Scalar>(u: &DMatrix<T>, center: &DVector<T>) -> T {
    u.row_iter().fold(T::zero(), |acc, r| acc.max((r.transpose() - center).norm()))
}

/// `Σ_i ‖u_i − a‖²`.
fn distance_to_row<T: Scalar>(u: &DMatrix<T>, a: &DVector<T>) -> T {
    u.row_iter().fold(T::zero(), |acc, r| acc + (r.transpose() - a).norm_squared())
}

/// Evaluates `f(a) − f(b) ≤ ⟨ḡ, a − b⟩ + (L/2n)‖U − 1a‖²_F` at `trials`
/// random pairs drawn around the agents' current points, with
/// `ḡ = (1/n)Σ_i ∇f_i(u_i)` and `U = V⁻¹X`.
pub fn check_inexact_bounds<T: Scalar>(
    suite: &ObjectiveSuite<T>,
    state: &SolverState<T>,
    trials: usize,
    seed: u64,
) -> InequalityReport {
    let u = state.u();
    let gbar = column_average(state.local_gradients());
    let center = column_average(&u);
    let radius = T::one() + spread(&u, &center);
    let n = T::of_usize(suite.n());
    let l = suite.smoothness();
    let mut rng = rng(seed);
    let mut report = InequalityReport::empty();
    for _ in 0..trials {
        let a = &center + gaussian_vector::<T>(suite.dim(), &mut rng) * radius;
        let b = &center + gaussian_vector::<T>(suite.dim(), &mut rng) * radius;
        report.add_pair(suite, &u, &gbar, &a, &b, l, n);
    }
    report
}

impl InequalityReport {
    #[allow(clippy::too_many_arguments)]
    fn add_pair<T: Scalar>(
        &mut self,
        suite: &ObjectiveSuite<T>,
        u: &DMatrix<T>,
        gbar: &DVector<T>,
        a: &DVector<T>,
        b: &DVector<T>,
        l: T,
        n: T,
    ) {
        let lhs = suite.average_value(a) - suite.average_value(b);
        let rhs = gbar.dot(&(a - b)) + l / (T::lit(2.0) * n) * distance_to_row(u, a);
        self.add(lhs.as_f64(), rhs.as_f64());
    }
}

/// The same inequality at explicit points, e.g. `a = b` or a consensus state.
pub fn check_inexact_bound_at<T: Scalar>(
    suite: &ObjectiveSuite<T>,
    state: &SolverState<T>,
    a: &DVector<T>,
    b: &DVector<T>,
) -> InequalityReport {
    let u = state.u();
    let gbar = column_average(state.local_gradients());
    let mut report = InequalityReport::empty();
    report.add_pair(suite, &u, &gbar, a, b, suite.smoothness(), T::of_usize(suite.n()));
    report
}

/// Strongly convex variant at `a = x̄`, `b = x*`:
/// `f(x̄) ≤ f* + ⟨ḡ, x̄ − x*⟩ − (μ/4)‖x̄ − x*‖² + (L/n)‖U − 1x̄‖²_F`.
pub fn check_strong_inexact_bound<T: Scalar>(
    suite: &ObjectiveSuite<T>,
    state: &SolverState<T>,
    xstar: &DVector<T>,
    fstar: T,
) -> InequalityReport {
    let u = state.u();
    let gbar = column_average(state.local_gradients());
    let xbar = column_average(state.x());
    let n = T::of_usize(suite.n());
    let diff = &xbar - xstar;
    let lhs = suite.average_value(&xbar);
    let rhs = fstar + gbar.dot(&diff) - suite.strong_convexity() / T::lit(4.0) * diff.norm_squared()
        + suite.smoothness() / n * distance_to_row(&u, &xbar);
    let mut report = InequalityReport::empty();
    report.add(lhs.as_f64(), rhs.as_f64());
    report
}

/// `(‖v_k − p‖_C̃, (1−δ)^k‖v0 − p‖_C̃)` for `k = 0..=steps` of pure push-sum.
pub fn push_sum_decay<T: Scalar>(
    mix: &MixingMatrix<T>,
    nt: &NormTransform<T>,
    v0: &DVector<T>,
    steps: usize,
) -> Vec<(T, T)> {
    let p = mix.perron();
    let base = nt.vec_norm(&(v0 - p));
    let rate = T::one() - nt.delta();
    let mut v = v0.clone();
    let mut out = Vec::with_capacity(steps + 1);
    let mut factor = T::one();
    for _ in 0..=steps {
        out.push((nt.vec_norm(&(&v - p)), factor * base));
        v = mix.matrix() * v;
        factor *= rate;
    }
    out
}
