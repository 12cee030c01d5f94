use crate::error::{Error, Result};
use crate::graph::{MixingMatrix, NormTransform};
use crate::scalar::Scalar;
use nalgebra::DVector;

/// Stepsize policy for the default parameter helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParamMode {
    /// `eta = c / L` with a user constant `c` (0.3 unless overridden).
    #[default]
    Practical,
    /// `eta` is the minimum of the stepsize ceilings required by the
    /// convergence theorems; provably convergent but very conservative.
    Theoretical,
}

pub const DEFAULT_PRACTICAL_STEP: f64 = 0.3;

/// Graph-dependent quantities entering the theoretical stepsize ceilings.
#[derive(Clone, Copy, Debug)]
pub struct TheoryInputs<T: Scalar> {
    pub n: usize,
    /// Contraction margin of the weighted norm.
    pub delta: T,
    /// Norm-equivalence constant of the weighted norm.
    pub theta: T,
    /// Bound on `1 / min_i v_{k,i}` over the run.
    pub vhat: T,
    /// `‖v0 − p‖` in the weighted norm.
    pub v0_deviation: T,
}

impl<T: Scalar> TheoryInputs<T> {
    /// Takes `delta`, `theta` from the norm transform and estimates `vhat`
    /// from `steps` rounds of pure push-sum started at `v0`.
    pub fn calibrate(mix: &MixingMatrix<T>, nt: &NormTransform<T>, v0: &DVector<T>, steps: usize) -> Self {
        let mut v = v0.clone();
        let mut vhat = T::one() / v.min();
        for _ in 0..steps {
            v = mix.matrix() * v;
            vhat = vhat.max(T::one() / v.min());
        }
        TheoryInputs {
            n: mix.n(),
            delta: nt.delta(),
            theta: nt.theta(),
            vhat: vhat.max(T::one()),
            v0_deviation: nt.vec_norm(&(v0 - mix.perron())),
        }
    }
}

/// Parameters of the accelerated method for smooth convex objectives.
/// Schedules: `τ_k = wb / (1 + wa·k)`, `α_k = pa / τ_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApdParams<T: Scalar> {
    pub eta: T,
    pub pa: T,
    pub wa: T,
    pub wb: T,
}

impl<T: Scalar> ApdParams<T> {
    pub fn tau(&self, k: usize) -> T {
        self.wb / (T::one() + self.wa * T::of_usize(k))
    }

    pub fn alpha(&self, k: usize) -> T {
        self.pa / self.tau(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.eta > T::zero()
            && self.pa > T::zero()
            && self.pa < T::one()
            && self.wa >= T::zero()
            && self.wb > T::zero()
            && self.wb <= T::one();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid APD parameters {self:?}")))
        }
    }

    /// Additionally checks `0 < wa ≤ wb/4`, the schedule condition of the
    /// sublinear-rate guarantee.
    pub fn validate_theoretical(&self) -> Result<()> {
        self.validate()?;
        if self.wa > T::zero() && self.wa <= self.wb / T::lit(4.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("need 0 < wa <= wb/4, got wa = {}, wb = {}", self.wa, self.wb)))
        }
    }
}

/// Parameters of the accelerated method for strongly convex objectives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApdScParams<T: Scalar> {
    pub eta: T,
    pub alpha: T,
    pub beta: T,
    pub tau: T,
}

impl<T: Scalar> ApdScParams<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.eta > T::zero()
            && self.alpha > T::zero()
            && self.beta >= T::zero()
            && self.beta <= T::one()
            && self.tau > T::zero()
            && self.tau <= T::one();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid APD-SC parameters {self:?}")))
        }
    }

    /// `alpha·tau = 1/12` and `0 < beta ≤ tau < 1`.
    pub fn validate_theoretical(&self) -> Result<()> {
        self.validate()?;
        let product = self.alpha * self.tau;
        let ok = (product - T::one() / T::lit(12.0)).abs() <= T::lit(1e-12)
            && self.beta > T::zero()
            && self.beta <= self.tau
            && self.tau < T::one();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("parameters {self:?} violate alpha*tau = 1/12, 0 < beta <= tau < 1")))
        }
    }
}

/// `c₃ = 3(δ² + 2pa²δ + 4pa²)`, weight of the tracking error in the smooth-case potential.
pub fn lyapunov_c3<T: Scalar>(delta: T, pa: T) -> T {
    T::lit(3.0) * (delta * delta + T::lit(2.0) * pa * pa * delta + T::lit(4.0) * pa * pa)
}

/// `c₄ = 26√e`, the geometric-series constant of the smooth-case analysis.
pub fn series_c4<T: Scalar>() -> T {
    T::lit(26.0 * std::f64::consts::E.sqrt())
}

/// `c₅ = (8/7)(3δ/2 + 6(ατ)²δ + 48(ατ)²/7)`, weight of the tracking error in
/// the strongly convex potential.
pub fn lyapunov_c5<T: Scalar>(delta: T, alpha_tau: T) -> T {
    let at2 = alpha_tau * alpha_tau;
    T::lit(8.0 / 7.0) * (T::lit(1.5) * delta + T::lit(6.0) * at2 * delta + T::lit(48.0 / 7.0) * at2)
}

/// Stepsize ceilings for the smooth case with `pa`, `wa`, `wb` fixed; the
/// second ceiling is skipped when `‖v0 − p‖ = 0`.
pub fn smooth_stepsize_ceilings<T: Scalar>(l: T, pa: T, wa: T, wb: T, th: &TheoryInputs<T>) -> Vec<T> {
    let (d, tv) = (th.delta, th.theta * th.vhat);
    let c3 = lyapunov_c3(d, pa);
    let c4 = series_c4::<T>();
    let d4 = d.powi(4);
    let one = T::one();
    let mut out = vec![
        pa.sqrt() * d4 / ((T::lit(96.0) * (T::lit(15.0) + T::lit(9.0) * pa) * c3 * c4).sqrt() * tv * l),
        one / (T::lit(8.0) * pa * l),
        d4 / (T::lit(12.0) * tv * (c3 * c4 * (T::lit(6.0) + pa)).sqrt() * l),
        wb.sqrt() * d4 / (T::lit(12.0) * (T::lit(3.0) * wa * c3 * c4).sqrt() * tv * l),
        d4 / (T::lit(12.0) * tv * (c3 * c4).sqrt() * l),
    ];
    let dev2 = th.v0_deviation * th.v0_deviation;
    if dev2 > T::zero() {
        out.push(
            T::of_usize(th.n) * pa * d.powi(6) / (T::lit(1920.0) * dev2 * tv * tv * (one + pa) * (one + pa) * c4 * l),
        );
    }
    out
}

/// Stepsize ceilings for the strongly convex case at `alpha·tau = 1/12`.
pub fn sc_stepsize_ceilings<T: Scalar>(l: T, th: &TheoryInputs<T>) -> Vec<T> {
    let at = T::one() / T::lit(12.0);
    let (d, tv) = (th.delta, th.theta * th.vhat);
    let c5 = lyapunov_c5(d, at);
    let d3 = d.powi(3);
    let one = T::one();
    let mut out = vec![
        at.sqrt() * d3 / (T::lit(8.0) * (T::lit(5.0) * c5 * (T::lit(15.0) + T::lit(9.0) * at)).sqrt() * tv * l),
        one / (T::lit(24.0) * at * l),
        d3 / (T::lit(8.0) * (T::lit(5.0) * c5 * (T::lit(18.0) + T::lit(3.0) * at)).sqrt() * tv * l),
        d3 / (T::lit(8.0) * (T::lit(15.0) * c5).sqrt() * tv * l),
    ];
    let dev2 = th.v0_deviation * th.v0_deviation;
    if dev2 > T::zero() {
        out.push(at * T::of_usize(th.n) * d.powi(4) / (T::lit(2160.0) * tv * tv * (one + at) * (one + at) * dev2 * l));
    }
    out
}

fn min_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().fold(xs[0], |a, b| a.min(b))
}

/// Defaults for the smooth-case method: `pa = 1/4`, `wb = 1`, `wa = 1/4`,
/// and `eta = c/L` (practical) or the smallest theoretical ceiling.
pub fn default_params_smooth<T: Scalar>(
    l: T,
    mode: ParamMode,
    theory: Option<&TheoryInputs<T>>,
    practical_step: T,
) -> Result<ApdParams<T>> {
    if !(l > T::zero()) {
        return Err(Error::InvalidArgument(format!("smoothness constant must be positive, got {l}")));
    }
    let pa = T::lit(0.25);
    let wb = T::one();
    let wa = wb / T::lit(4.0);
    let eta = match mode {
        ParamMode::Practical => practical_step / l,
        ParamMode::Theoretical => {
            let th = theory.ok_or_else(|| Error::InvalidArgument("theoretical mode needs graph constants".into()))?;
            min_of(&smooth_stepsize_ceilings(l, pa, wa, wb, th))
        }
    };
    Ok(ApdParams { eta, pa, wa, wb })
}

/// Defaults for the strongly convex method: `tau = √(mu·eta/24)`,
/// `alpha = 1/(12 tau)` and `beta = min{tau, δ/16, δ²/(8 tau), mu·alpha·eta/2}`
/// (the `δ` caps apply whenever graph constants are supplied).
pub fn default_params_sc<T: Scalar>(
    l: T,
    mu: T,
    mode: ParamMode,
    theory: Option<&TheoryInputs<T>>,
    practical_step: T,
) -> Result<ApdScParams<T>> {
    if !(mu > T::zero() && mu <= l) {
        return Err(Error::InvalidArgument(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    let eta = match mode {
        ParamMode::Practical => practical_step / l,
        ParamMode::Theoretical => {
            let th = theory.ok_or_else(|| Error::InvalidArgument("theoretical mode needs graph constants".into()))?;
            min_of(&sc_stepsize_ceilings(l, th))
        }
    };
    let tau = (mu * eta / T::lit(24.0)).sqrt();
    let alpha = T::one() / (T::lit(12.0) * tau);
    let mut beta = tau.min(mu * alpha * eta / T::lit(2.0));
    if let Some(th) = theory {
        let d = th.delta;
        beta = beta.min(d / T::lit(16.0)).min(d * d / (T::lit(8.0) * tau));
    }
    Ok(ApdScParams { eta, alpha, beta, tau })
}
