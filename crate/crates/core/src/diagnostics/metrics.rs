use crate::graph::{MixingMatrix, NormTransform};
use crate::objectives::ObjectiveSuite;
use crate::optimizers::{lyapunov_c3, lyapunov_c5, ApdParams, ApdScParams, SolverState};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Row vector `(1/n)·1ᵀA` as a column vector.
pub fn column_average<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    a.row_sum().transpose() / T::of_usize(a.nrows())
}

/// `ΠA = A − p·(1ᵀA)/n`.
pub fn project<T: Scalar>(p: &DVector<T>, a: &DMatrix<T>) -> DMatrix<T> {
    a - p * column_average(a).transpose()
}

/// `(1/n)Σ_i f(row_i) − f*`, with `f` the average objective. Differences
/// are taken against `x*` term by term so that gaps far below `ε·|f*|`
/// stay resolvable; `f(x*) − f*` is added back.
pub fn optimality_gap<T: Scalar>(suite: &ObjectiveSuite<T>, output: &DMatrix<T>, xstar: &DVector<T>, fstar: T) -> T {
    let n = output.nrows();
    let total = (0..n).fold(T::zero(), |acc, i| acc + suite.average_value_gap(&output.row(i).transpose(), xstar));
    total / T::of_usize(n) + (suite.average_value(xstar) - fstar)
}

/// `(‖V⁻¹X − 1x̄‖_F, ‖ΠX‖_F)` with `x̄ = (1/n)1ᵀX`.
pub fn consensus_error<T: Scalar>(state: &SolverState<T>, p: &DVector<T>) -> (T, T) {
    let xbar = column_average(state.x());
    let mut dev = state.u();
    for mut row in dev.row_iter_mut() {
        row -= xbar.transpose();
    }
    (dev.norm(), project(p, state.x()).norm())
}

/// Consensus bound `2θ²v̂²(‖ΠX‖²_C̃ + (1−δ)^{2k}‖v0 − p‖²_C̃‖x̄‖²)` with
/// `v̂` the largest `1/min v` seen so far.
pub fn consensus_bound<T: Scalar>(
    state: &SolverState<T>,
    mix: &MixingMatrix<T>,
    nt: &NormTransform<T>,
    v0: &DVector<T>,
) -> T {
    let p = mix.perron();
    let xbar = column_average(state.x());
    let decay = (T::one() - nt.delta()).powi(2 * state.k() as i32);
    let dev = nt.vec_norm(&(v0 - p));
    let tv = nt.theta() * state.vhat_seen();
    T::lit(2.0) * tv * tv * (nt.mat_norm(&project(p, state.x())).powi(2) + decay * dev * dev * xbar.norm_squared())
}

fn squared<T: Scalar>(x: T) -> T {
    x * x
}

/// `(Φ1, Φ2)` for the smooth-case method at the state's iteration `k`:
/// `Φ1 = (1−δ)^{2k}(‖x̄‖² + (8/δ²)τ_k²‖z̄‖²)`,
/// `Φ2 = ‖ΠX‖²_C̃ + (6/δ²)‖ΠZ‖²_C̃ + (c₃η²/δ⁴)‖ΠG‖²_C̃`.
pub fn lyapunov_smooth<T: Scalar>(
    state: &SolverState<T>,
    params: &ApdParams<T>,
    p: &DVector<T>,
    nt: &NormTransform<T>,
) -> (T, T) {
    let d = nt.delta();
    let k = state.k();
    let tau = params.tau(k);
    let decay = (T::one() - d).powi(2 * k as i32);
    let phi1 = decay
        * (column_average(state.x()).norm_squared()
            + T::lit(8.0) / (d * d) * tau * tau * column_average(state.z()).norm_squared());
    let c3 = lyapunov_c3(d, params.pa);
    let phi2 = squared(nt.mat_norm(&project(p, state.x())))
        + T::lit(6.0) / (d * d) * squared(nt.mat_norm(&project(p, state.z())))
        + c3 * params.eta * params.eta / d.powi(4) * squared(nt.mat_norm(&project(p, state.g())));
    (phi1, phi2)
}

/// `(Φ3, Φ4)` for the strongly convex method:
/// `Φ3 = (1−δ)^{2k}(‖x̄‖² + (8/δ²)τ²‖z̄‖²)`,
/// `Φ4 = ‖ΠX‖²_C̃ + (24/(7δ²))‖ΠZ‖²_C̃ + (c₅η²/δ⁴)‖ΠG‖²_C̃`.
pub fn lyapunov_sc<T: Scalar>(
    state: &SolverState<T>,
    params: &ApdScParams<T>,
    p: &DVector<T>,
    nt: &NormTransform<T>,
) -> (T, T) {
    let d = nt.delta();
    let tau = params.tau;
    let decay = (T::one() - d).powi(2 * state.k() as i32);
    let phi3 = decay
        * (column_average(state.x()).norm_squared()
            + T::lit(8.0) / (d * d) * tau * tau * column_average(state.z()).norm_squared());
    let c5 = lyapunov_c5(d, params.alpha * tau);
    let phi4 = squared(nt.mat_norm(&project(p, state.x())))
        + T::lit(24.0) / (T::lit(7.0) * d * d) * squared(nt.mat_norm(&project(p, state.z())))
        + c5 * params.eta * params.eta / d.powi(4) * squared(nt.mat_norm(&project(p, state.g())));
    (phi3, phi4)
}
