//! Error metrics, Lyapunov potentials, inequality spot-checks and rate fits.

mod checks;
mod metrics;
mod rates;
mod recorder;
mod trace;

pub use checks::{
    check_inexact_bound_at, check_inexact_bounds, check_strong_inexact_bound, push_sum_decay, InequalityReport,
    INEQUALITY_TOLERANCE,
};
pub use metrics::{
    column_average, consensus_bound, consensus_error, lyapunov_sc, lyapunov_smooth, optimality_gap, project,
};
pub use rates::{fit_linear_rate, fit_sublinear_rate};
pub use recorder::{LyapunovSpec, Phi4Monitor, RecursionStep, TraceRecorder};
pub use trace::{RecordStride, RunTrace, TraceRecord};
