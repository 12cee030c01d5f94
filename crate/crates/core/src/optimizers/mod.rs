//! Decentralized solvers over a column-stochastic mixing matrix.
//!
//! Every solver keeps a [`SolverState`], calls an [`Observer`] once at
//! `k = 0` and after every step, and returns the per-agent estimates
//! together with the final state.

mod agm;
mod params;
mod state;

pub use agm::{centralized_agm_run, AgmIterate};
pub use params::{
    default_params_sc, default_params_smooth, lyapunov_c3, lyapunov_c5, sc_stepsize_ceilings, series_c4,
    smooth_stepsize_ceilings, ApdParams, ApdScParams, ParamMode, TheoryInputs, DEFAULT_PRACTICAL_STEP,
};
pub use state::{row_scaled, validate_weights, SolverState};

use crate::error::{Error, Result};
use crate::graph::MixingMatrix;
use crate::objectives::ObjectiveSuite;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Callback invoked synchronously inside a run loop.
pub trait Observer<T: Scalar> {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()>;
}

impl<T: Scalar> Observer<T> for () {
    fn observe(&mut self, _: &SolverState<T>) -> Result<()> {
        Ok(())
    }
}

/// Adapts a closure into an [`Observer`].
pub struct FnObserver<F>(pub F);

pub fn from_fn<T: Scalar, F: FnMut(&SolverState<T>) -> Result<()>>(f: F) -> FnObserver<F> {
    FnObserver(f)
}

impl<T: Scalar, F: FnMut(&SolverState<T>) -> Result<()>> Observer<T> for FnObserver<F> {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()> {
        (self.0)(state)
    }
}

impl<T: Scalar, A: Observer<T>, B: Observer<T>> Observer<T> for (A, B) {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()> {
        self.0.observe(state)?;
        self.1.observe(state)
    }
}

impl<T: Scalar, O: Observer<T> + ?Sized> Observer<T> for &mut O {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()> {
        (**self).observe(state)
    }
}

/// Result of a solver run.
#[derive(Clone, Debug)]
pub struct RunOutput<T: Scalar> {
    /// Row `i` is agent `i`'s estimate.
    pub estimates: DMatrix<T>,
    pub state: SolverState<T>,
}

/// Selects one of the solvers together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T: Scalar> {
    Apd(ApdParams<T>),
    ApdSc(ApdScParams<T>),
    PushDiging { eta: T },
    SubgradientPush { step_c: T },
}

impl<T: Scalar> Method<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Apd(_) => "APD",
            Method::ApdSc(_) => "APD-SC",
            Method::PushDiging { .. } => "Push-DIGing",
            Method::SubgradientPush { .. } => "Subgradient-Push",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Apd(p) => p.validate(),
            Method::ApdSc(p) => p.validate(),
            Method::PushDiging { eta } if *eta > T::zero() => Ok(()),
            Method::SubgradientPush { step_c } if *step_c > T::zero() => Ok(()),
            _ => Err(Error::InvalidArgument(format!("{} needs a positive stepsize", self.name()))),
        }
    }

    pub fn step(&self, state: &mut SolverState<T>, mix: &MixingMatrix<T>, suite: &ObjectiveSuite<T>) -> Result<()> {
        match self {
            Method::Apd(p) => apd_step(state, mix, suite, p),
            Method::ApdSc(p) => apdsc_step(state, mix, suite, p),
            Method::PushDiging { eta } => push_diging_step(state, mix, suite, *eta),
            Method::SubgradientPush { step_c } => subgradient_push_step(state, mix, suite, *step_c),
        }
    }

    /// Estimates reported by the method: `V⁻¹Y` for the accelerated
    /// methods, `V⁻¹X` for the baselines (identical there since `Y = X`).
    pub fn run(
        &self,
        x0: DMatrix<T>,
        v0: DVector<T>,
        mix: &MixingMatrix<T>,
        suite: &ObjectiveSuite<T>,
        iterations: usize,
        mut observer: impl Observer<T>,
    ) -> Result<RunOutput<T>> {
        self.validate()?;
        if mix.n() != suite.n() {
            return Err(Error::InvalidArgument(format!(
                "mixing matrix has {} agents, objective suite has {}",
                mix.n(),
                suite.n()
            )));
        }
        let mut state = SolverState::new(x0, v0, suite)?;
        observer.observe(&state)?;
        for _ in 0..iterations {
            self.step(&mut state, mix, suite)?;
            observer.observe(&state)?;
        }
        Ok(RunOutput { estimates: state.output(), state })
    }
}

fn mixed<T: Scalar>(mix: &MixingMatrix<T>, a: &DMatrix<T>) -> DMatrix<T> {
    mix.matrix() * a
}

/// Shared tail of the gradient-tracking methods: `v⁺ = Cv`, gradient at
/// `V⁺⁻¹X⁺`, and `G⁺ = CG + ∇F⁺ − ∇F`.
fn track<T: Scalar>(
    state: &mut SolverState<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    x: DMatrix<T>,
    y: DMatrix<T>,
    z: DMatrix<T>,
) -> Result<()> {
    let v = mix.matrix() * &state.v;
    ensure_positive(&v, state.k + 1)?;
    ensure_finite_blocks(&x, state.k + 1)?;
    let grad = suite.stacked_gradient(&row_scaled(&x, &v));
    let g = mixed(mix, &state.g) + &grad - &state.grad;
    state.advance(x, y, z, g, v, grad)
}

fn ensure_positive<T: Scalar>(v: &DVector<T>, iteration: usize) -> Result<()> {
    if v.iter().all(|&w| w > T::zero() && w.is_finite_value()) {
        Ok(())
    } else {
        Err(Error::Divergence { iteration, quantity: "v" })
    }
}

// Gradients of non-finite points may panic inside the objective, so X is checked first.
fn ensure_finite_blocks<T: Scalar>(x: &DMatrix<T>, iteration: usize) -> Result<()> {
    state::ensure_finite(x, iteration, "X")
}

/// One step of the accelerated method for smooth convex objectives:
/// `Y⁺ = C(X − ηG)`, `Z⁺ = C(Z − α_kηG)`, `X⁺ = (1 − τ_{k+1})Y⁺ + τ_{k+1}Z⁺`.
pub fn apd_step<T: Scalar>(
    state: &mut SolverState<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    params: &ApdParams<T>,
) -> Result<()> {
    let k = state.k;
    let eg = &state.g * params.eta;
    let y = mixed(mix, &(&state.x - &eg));
    let z = mixed(mix, &(&state.z - &eg * params.alpha(k)));
    let tau = params.tau(k + 1);
    let x = &y * (T::one() - tau) + &z * tau;
    track(state, mix, suite, x, y, z)
}

/// One step of the strongly convex variant:
/// `Z⁺ = C((1 − β)Z + βX − αηG)` with constant `τ`.
pub fn apdsc_step<T: Scalar>(
    state: &mut SolverState<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    params: &ApdScParams<T>,
) -> Result<()> {
    let eg = &state.g * params.eta;
    let y = mixed(mix, &(&state.x - &eg));
    let inner = &state.z * (T::one() - params.beta) + &state.x * params.beta - &eg * params.alpha;
    let z = mixed(mix, &inner);
    let x = &y * (T::one() - params.tau) + &z * params.tau;
    track(state, mix, suite, x, y, z)
}

/// Push-DIGing / ADD-OPT: `X⁺ = C(X − ηG)`; `Y` and `Z` mirror `X`.
pub fn push_diging_step<T: Scalar>(
    state: &mut SolverState<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    eta: T,
) -> Result<()> {
    let x = mixed(mix, &(&state.x - &state.g * eta));
    track(state, mix, suite, x.clone(), x.clone(), x)
}

/// Subgradient-Push: `X⁺ = CX − η_k∇F(V⁻¹X)` with `η_k = c/√(k+1)`.
/// `G` holds the current local gradients (no tracking).
pub fn subgradient_push_step<T: Scalar>(
    state: &mut SolverState<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    step_c: T,
) -> Result<()> {
    let eta = step_c / T::of_usize(state.k + 1).sqrt();
    let x = mixed(mix, &state.x) - &state.grad * eta;
    let v = mix.matrix() * &state.v;
    ensure_positive(&v, state.k + 1)?;
    ensure_finite_blocks(&x, state.k + 1)?;
    let grad = suite.stacked_gradient(&row_scaled(&x, &v));
    state.advance(x.clone(), x.clone(), x, grad.clone(), v, grad)
}

/// Accelerated method for smooth convex objectives; returns `V_K⁻¹Y_K`.
pub fn apd_run<T: Scalar>(
    x0: DMatrix<T>,
    v0: DVector<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    params: &ApdParams<T>,
    iterations: usize,
    observer: impl Observer<T>,
) -> Result<RunOutput<T>> {
    Method::Apd(*params).run(x0, v0, mix, suite, iterations, observer)
}

/// Accelerated method for strongly convex objectives; returns `V_K⁻¹Y_K`.
pub fn apdsc_run<T: Scalar>(
    x0: DMatrix<T>,
    v0: DVector<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    params: &ApdScParams<T>,
    iterations: usize,
    observer: impl Observer<T>,
) -> Result<RunOutput<T>> {
    Method::ApdSc(*params).run(x0, v0, mix, suite, iterations, observer)
}

pub fn push_diging_run<T: Scalar>(
    x0: DMatrix<T>,
    v0: DVector<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    eta: T,
    iterations: usize,
    observer: impl Observer<T>,
) -> Result<RunOutput<T>> {
    Method::PushDiging { eta }.run(x0, v0, mix, suite, iterations, observer)
}

pub fn subgradient_push_run<T: Scalar>(
    x0: DMatrix<T>,
    v0: DVector<T>,
    mix: &MixingMatrix<T>,
    suite: &ObjectiveSuite<T>,
    step_c: T,
    iterations: usize,
    observer: impl Observer<T>,
) -> Result<RunOutput<T>> {
    Method::SubgradientPush { step_c }.run(x0, v0, mix, suite, iterations, observer)
}
