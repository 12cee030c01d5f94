use super::metrics::{column_average, consensus_error, lyapunov_sc, lyapunov_smooth, optimality_gap};
use super::trace::{RecordStride, RunTrace, TraceRecord};
use crate::error::Result;
use crate::graph::{MixingMatrix, NormTransform};
use crate::objectives::ObjectiveSuite;
use crate::optimizers::{lyapunov_c5, ApdParams, ApdScParams, Observer, SolverState};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Which pair of Lyapunov functions to evaluate.
#[derive(Clone, Copy, Debug)]
pub enum LyapunovSpec<T: Scalar> {
    Smooth(ApdParams<T>),
    StronglyConvex(ApdScParams<T>),
}

/// Observer that samples a [`RunTrace`] along a run.
pub struct TraceRecorder<'a, T: Scalar> {
    suite: &'a ObjectiveSuite<T>,
    mix: &'a MixingMatrix<T>,
    xstar: DVector<T>,
    fstar: T,
    stride: RecordStride,
    last_k: Option<usize>,
    lyapunov: Option<(&'a NormTransform<T>, LyapunovSpec<T>)>,
    trace: RunTrace,
}

impl<'a, T: Scalar> TraceRecorder<'a, T> {
    pub fn new(
        label: impl Into<String>,
        suite: &'a ObjectiveSuite<T>,
        mix: &'a MixingMatrix<T>,
        xstar: DVector<T>,
        fstar: T,
    ) -> Self {
        TraceRecorder {
            suite,
            mix,
            xstar,
            fstar,
            stride: RecordStride::default(),
            last_k: None,
            lyapunov: None,
            trace: RunTrace::new(label),
        }
    }

    pub fn with_stride(mut self, stride: RecordStride) -> Self {
        self.stride = stride;
        self
    }

    /// Forces a record at iteration `k` (the run length) regardless of stride.
    pub fn with_final_iteration(mut self, k: usize) -> Self {
        self.last_k = Some(k);
        self
    }

    pub fn with_lyapunov(mut self, nt: &'a NormTransform<T>, spec: LyapunovSpec<T>) -> Self {
        self.lyapunov = Some((nt, spec));
        self
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RunTrace {
        self.trace
    }

    pub fn record(&self, state: &SolverState<T>) -> TraceRecord {
        let p = self.mix.perron();
        let (u_err, proj_err) = consensus_error(state, p);
        let gbar = column_average(state.local_gradients());
        let (mut phi1, mut phi2, mut phi3, mut phi4) = (None, None, None, None);
        match &self.lyapunov {
            Some((nt, LyapunovSpec::Smooth(params))) => {
                let (a, b) = lyapunov_smooth(state, params, p, nt);
                (phi1, phi2) = (Some(a.as_f64()), Some(b.as_f64()));
            }
            Some((nt, LyapunovSpec::StronglyConvex(params))) => {
                let (a, b) = lyapunov_sc(state, params, p, nt);
                (phi3, phi4) = (Some(a.as_f64()), Some(b.as_f64()));
            }
            None => {}
        }
        TraceRecord {
            k: state.k(),
            loss: optimality_gap(self.suite, &state.output(), &self.xstar, self.fstar).as_f64(),
            consensus_error: u_err.as_f64(),
            projection_error: proj_err.as_f64(),
            grad_avg_norm: gbar.norm().as_f64(),
            phi1,
            phi2,
            phi3,
            phi4,
            v_min: state.v().min().as_f64(),
        }
    }
}

impl<T: Scalar> Observer<T> for TraceRecorder<'_, T> {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()> {
        let k = state.k();
        if k == 0 || self.stride.includes(k) || self.last_k == Some(k) {
            let rec = self.record(state);
            self.trace.push(rec);
        }
        Ok(())
    }
}

/// One transition `k → k+1` of the strongly convex consensus potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionStep {
    pub k: usize,
    /// `Φ4` at `k + 1`.
    pub lhs: f64,
    /// `(1 − δ/8)Φ4_k + (c₅η²/δ⁵)‖∇F(U_{k+1}) − ∇F(U_k)‖²_F`.
    pub rhs: f64,
}

impl RecursionStep {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// Slack normalised by `1 + |lhs| + |rhs|`.
    pub fn relative_slack(&self) -> f64 {
        self.slack() / (1.0 + self.lhs.abs() + self.rhs.abs())
    }
}

/// Observer evaluating the one-step inequality of the strongly convex
/// consensus potential along a run.
pub struct Phi4Monitor<'a, T: Scalar> {
    params: ApdScParams<T>,
    mix: &'a MixingMatrix<T>,
    nt: &'a NormTransform<T>,
    prev: Option<(T, DMatrix<T>)>,
    steps: Vec<RecursionStep>,
}

impl<'a, T: Scalar> Phi4Monitor<'a, T> {
    pub fn new(params: ApdScParams<T>, mix: &'a MixingMatrix<T>, nt: &'a NormTransform<T>) -> Self {
        Phi4Monitor { params, mix, nt, prev: None, steps: Vec::new() }
    }

    pub fn steps(&self) -> &[RecursionStep] {
        &self.steps
    }

    /// Smallest relative slack over transitions with `k < upto`.
    pub fn min_relative_slack(&self, upto: usize) -> Option<f64> {
        self.steps.iter().filter(|s| s.k < upto).map(RecursionStep::relative_slack).reduce(f64::min)
    }
}

impl<T: Scalar> Observer<T> for Phi4Monitor<'_, T> {
    fn observe(&mut self, state: &SolverState<T>) -> Result<()> {
        let (_, phi4) = lyapunov_sc(state, &self.params, self.mix.perron(), self.nt);
        let grad = state.local_gradients().clone();
        if let Some((prev_phi, prev_grad)) = self.prev.take() {
            let d = self.nt.delta();
            let c5 = lyapunov_c5(d, self.params.alpha * self.params.tau);
            let eta = self.params.eta;
            let forcing = c5 * eta * eta / d.powi(5) * (&grad - &prev_grad).norm_squared();
            let rhs = (T::one() - d / T::lit(8.0)) * prev_phi + forcing;
            self.steps.push(RecursionStep { k: state.k() - 1, lhs: phi4.as_f64(), rhs: rhs.as_f64() });
        }
        self.prev = Some((phi4, grad));
        Ok(())
    }
}
