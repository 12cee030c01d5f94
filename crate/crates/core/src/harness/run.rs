use super::config::{
    slug, AlgorithmKind, AlgorithmSpec, ExperimentConfig, ExplicitParams, GraphSpec, ObjectiveSpec, ParamChoice,
    ParamMode as ConfigMode,
};
use super::csv::emit_csv;
use super::svg::emit_svg_plot;
use crate::diagnostics::{fit_linear_rate, fit_sublinear_rate, LyapunovSpec, RunTrace, TraceRecorder};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, MixingMatrix, NormTransform};
use crate::objectives::{global_minimizer, LabeledDataset, Minimizer, MinimizerOptions, ObjectiveSuite};
use crate::optimizers::{
    default_params_sc, default_params_smooth, ApdParams, ApdScParams, Method, ParamMode, TheoryInputs,
};
use crate::sampling::{gaussian_matrix, rng};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Gap thresholds reported in summaries.
pub const THRESHOLDS: [f64; 3] = [1e-6, 1e-10, 1e-14];

/// Push-sum rounds used to estimate `v̂` for theoretical stepsizes.
pub const CALIBRATION_STEPS: usize = 50;

/// Everything shared by the algorithms of one experiment.
pub struct Problem {
    pub graph: DirectedGraph,
    pub mix: MixingMatrix<f64>,
    pub suite: ObjectiveSuite<f64>,
    pub minimizer: Minimizer<f64>,
    pub x0: DMatrix<f64>,
    pub v0: DVector<f64>,
    pub norm: Option<NormTransform<f64>>,
}

impl Problem {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = match &cfg.graph {
            GraphSpec::Random { n, extra_edges, seed } => DirectedGraph::cycle_plus_random(*n, *extra_edges, *seed)?,
            GraphSpec::EdgeList { edge_list } => DirectedGraph::read_edge_list(edge_list)?,
        };
        let n = graph.n();
        let mix = MixingMatrix::uniform_out_weights(&graph)?;
        let suite = match &cfg.objective {
            ObjectiveSpec::Quadratic { dim, kappa, mu_base, seed } => {
                ObjectiveSuite::random_quadratic(n, *dim, *kappa, *mu_base, *seed)?
            }
            ObjectiveSpec::Logistic {
                data,
                mu,
                partition_seed,
                standardize,
                rows,
                subsample_seed,
                synthetic_rows,
                synthetic_dim,
                synthetic_seed,
            } => {
                let mut set = match data {
                    Some(path) => LabeledDataset::load_csv(path)?,
                    None => LabeledDataset::synthetic(*synthetic_rows, *synthetic_dim, *synthetic_seed),
                };
                if let Some(r) = rows {
                    if set.len() < *r {
                        return Err(Error::Config(format!("dataset has {} rows, {r} required", set.len())));
                    }
                    set = set.subsample(*r, *subsample_seed)?;
                }
                if *standardize {
                    set = set.standardized();
                }
                ObjectiveSuite::logistic(&set, n, *mu, *partition_seed)?
            }
        };
        let minimizer = global_minimizer(&suite, MinimizerOptions::default())?;
        let x0 = gaussian_matrix(n, suite.dim(), &mut rng(cfg.init.seed));
        let v0 = match &cfg.init.v0 {
            Some(v) => DVector::from_column_slice(v),
            None => DVector::from_element(n, 1.0),
        };
        crate::optimizers::validate_weights(&v0, n).map_err(|e| Error::Config(format!("init.v0: {e}")))?;
        let needs_norm = cfg.record.lyapunov
            || cfg.algorithms.iter().any(|a| matches!(a.params, ParamChoice::Mode(ConfigMode::Theoretical)));
        let norm = if needs_norm { Some(NormTransform::build(&mix)?) } else { None };
        Ok(Problem { graph, mix, suite, minimizer, x0, v0, norm })
    }

    fn theory(&self) -> Result<TheoryInputs<f64>> {
        let nt = self.norm.as_ref().ok_or_else(|| Error::Config("norm transform not built".into()))?;
        Ok(TheoryInputs::calibrate(&self.mix, nt, &self.v0, CALIBRATION_STEPS))
    }
}

/// Parameters actually used by a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum ResolvedParams {
    Apd { eta: f64, pa: f64, wa: f64, wb: f64 },
    ApdSc { eta: f64, alpha: f64, beta: f64, tau: f64 },
    PushDiging { eta: f64 },
    SubgradientPush { step_c: f64 },
}

impl ResolvedParams {
    pub fn method(&self) -> Method<f64> {
        match *self {
            ResolvedParams::Apd { eta, pa, wa, wb } => Method::Apd(ApdParams { eta, pa, wa, wb }),
            ResolvedParams::ApdSc { eta, alpha, beta, tau } => Method::ApdSc(ApdScParams { eta, alpha, beta, tau }),
            ResolvedParams::PushDiging { eta } => Method::PushDiging { eta },
            ResolvedParams::SubgradientPush { step_c } => Method::SubgradientPush { step_c },
        }
    }
}

fn only(spec: &AlgorithmSpec, e: &ExplicitParams, allowed: &[&str]) -> Result<()> {
    let present = [
        ("eta", e.eta),
        ("pa", e.pa),
        ("wa", e.wa),
        ("wb", e.wb),
        ("alpha", e.alpha),
        ("beta", e.beta),
        ("tau", e.tau),
        ("step_c", e.step_c),
    ];
    match present.iter().find(|(name, v)| v.is_some() && !allowed.contains(name)) {
        Some((name, _)) => Err(Error::Config(format!("`{name}` is not a parameter of {}", spec.kind.display_name()))),
        None => Ok(()),
    }
}

fn required(spec: &AlgorithmSpec, name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("{} needs `{name}`", spec.label())))
}

/// Turns an algorithm block into concrete parameters. Missing smooth-case
/// fields in an explicit block fall back to the practical defaults.
pub fn resolve_params(spec: &AlgorithmSpec, problem: &Problem, practical_step: f64) -> Result<ResolvedParams> {
    let l = problem.suite.smoothness();
    let mu = problem.suite.strong_convexity();
    let resolved = match (spec.kind, &spec.params) {
        (AlgorithmKind::Apd, ParamChoice::Mode(mode)) => {
            let (m, th) = match mode {
                ConfigMode::Auto => (ParamMode::Practical, None),
                ConfigMode::Theoretical => (ParamMode::Theoretical, Some(problem.theory()?)),
            };
            let p = default_params_smooth(l, m, th.as_ref(), practical_step)?;
            ResolvedParams::Apd { eta: p.eta, pa: p.pa, wa: p.wa, wb: p.wb }
        }
        (AlgorithmKind::Apd, ParamChoice::Explicit(e)) => {
            only(spec, e, &["eta", "pa", "wa", "wb"])?;
            let wb = e.wb.unwrap_or(1.0);
            ResolvedParams::Apd {
                eta: e.eta.unwrap_or(practical_step / l),
                pa: e.pa.unwrap_or(0.25),
                wa: e.wa.unwrap_or(wb / 4.0),
                wb,
            }
        }
        (AlgorithmKind::ApdSc, ParamChoice::Mode(mode)) => {
            if !(mu > 0.0) {
                return Err(Error::Config(format!("{} needs a strongly convex objective", spec.label())));
            }
            let (m, th) = match mode {
                ConfigMode::Auto => (ParamMode::Practical, None),
                ConfigMode::Theoretical => (ParamMode::Theoretical, Some(problem.theory()?)),
            };
            let p = default_params_sc(l, mu, m, th.as_ref(), practical_step)?;
            ResolvedParams::ApdSc { eta: p.eta, alpha: p.alpha, beta: p.beta, tau: p.tau }
        }
        (AlgorithmKind::ApdSc, ParamChoice::Explicit(e)) => {
            only(spec, e, &["eta", "alpha", "beta", "tau"])?;
            ResolvedParams::ApdSc {
                eta: required(spec, "eta", e.eta)?,
                alpha: required(spec, "alpha", e.alpha)?,
                beta: required(spec, "beta", e.beta)?,
                tau: required(spec, "tau", e.tau)?,
            }
        }
        (AlgorithmKind::PushDiging, ParamChoice::Explicit(e)) => {
            only(spec, e, &["eta"])?;
            ResolvedParams::PushDiging { eta: required(spec, "eta", e.eta)? }
        }
        (AlgorithmKind::PushDiging, ParamChoice::Mode(_)) => ResolvedParams::PushDiging { eta: practical_step / l },
        (AlgorithmKind::SubgradientPush, ParamChoice::Explicit(e)) => {
            only(spec, e, &["step_c"])?;
            ResolvedParams::SubgradientPush { step_c: required(spec, "step_c", e.step_c)? }
        }
        (AlgorithmKind::SubgradientPush, ParamChoice::Mode(_)) => {
            ResolvedParams::SubgradientPush { step_c: practical_step / l }
        }
    };
    resolved.method().validate().map_err(|e| Error::Config(format!("{}: {e}", spec.label())))?;
    Ok(resolved)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub delta: f64,
    pub theta: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub label: String,
    pub kind: AlgorithmKind,
    pub mode: String,
    pub params: ResolvedParams,
    pub trace_file: String,
    pub final_gap: f64,
    /// First recorded iteration with gap at or below each threshold.
    pub iterations_to: BTreeMap<String, Option<usize>>,
    /// First recorded iteration after which the gap stays at or below each threshold.
    pub settled_below: BTreeMap<String, Option<usize>>,
    pub fit_window: (usize, usize),
    pub sublinear_slope: Option<f64>,
    pub linear_rate: Option<f64>,
    pub vhat_seen: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub iterations: usize,
    pub agents: usize,
    pub dim: usize,
    pub edges: usize,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub fstar: f64,
    pub minimizer_grad_norm: f64,
    pub norm: Option<NormSummary>,
    pub algorithms: Vec<AlgorithmSummary>,
    pub notes: Vec<String>,
}

impl ExperimentSummary {
    pub fn algorithm(&self, label: &str) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.label == label)
    }
}

/// First recorded `k` after which every recorded gap is at or below `threshold`.
pub fn settled_below(trace: &RunTrace, threshold: f64) -> Option<usize> {
    match trace.records.iter().rposition(|r| !(r.loss <= threshold)) {
        None => trace.records.first().map(|r| r.k),
        Some(i) => trace.records.get(i + 1).map(|r| r.k),
    }
}

fn threshold_key(t: f64) -> String {
    format!("{t:e}")
}

/// Window `[max(1, K/20), K]`, cut short before the first non-positive gap.
fn fit_window(trace: &RunTrace, iterations: usize) -> (usize, usize) {
    let lo = (iterations / 20).max(1);
    let hi = trace
        .records
        .iter()
        .find(|r| r.k >= lo && !(r.loss > 0.0))
        .map(|r| r.k.saturating_sub(1))
        .unwrap_or(iterations);
    (lo, hi)
}

fn summarize(
    spec: &AlgorithmSpec,
    params: ResolvedParams,
    trace: &RunTrace,
    vhat: f64,
    iterations: usize,
) -> AlgorithmSummary {
    let (lo, hi) = fit_window(trace, iterations);
    let mode = match spec.params {
        ParamChoice::Mode(ConfigMode::Auto) => "auto",
        ParamChoice::Mode(ConfigMode::Theoretical) => "theoretical",
        ParamChoice::Explicit(_) => "explicit",
    };
    AlgorithmSummary {
        label: spec.label(),
        kind: spec.kind,
        mode: mode.into(),
        params,
        trace_file: format!("{}.csv", slug(&spec.label())),
        final_gap: trace.final_loss().unwrap_or(f64::NAN),
        iterations_to: THRESHOLDS.iter().map(|&t| (threshold_key(t), trace.iterations_to(t))).collect(),
        settled_below: THRESHOLDS.iter().map(|&t| (threshold_key(t), settled_below(trace, t))).collect(),
        fit_window: (lo, hi),
        sublinear_slope: fit_sublinear_rate(trace, lo, hi).ok(),
        linear_rate: fit_linear_rate(trace, lo, hi).ok(),
        vhat_seen: vhat,
    }
}

/// Traces and summary of an experiment, before anything is written.
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub traces: Vec<RunTrace>,
    pub graph: DirectedGraph,
}

/// Runs every configured algorithm from the same `X0`, `v0`, graph and data.
/// Runs execute on separate threads; results are collected in config order.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let problem = Problem::build(cfg)?;
    let mut resolved = Vec::with_capacity(cfg.algorithms.len());
    for spec in &cfg.algorithms {
        resolved.push(resolve_params(spec, &problem, cfg.practical_step)?);
    }
    let k = cfg.iterations;
    let outcomes: Vec<Result<(RunTrace, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .algorithms
            .iter()
            .zip(&resolved)
            .map(|(spec, params)| {
                let problem = &problem;
                scope.spawn(move || run_one(cfg, problem, spec, params, k))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut algorithms = Vec::with_capacity(outcomes.len());
    for ((spec, params), outcome) in cfg.algorithms.iter().zip(resolved).zip(outcomes) {
        let (trace, vhat) = outcome.map_err(|e| Error::Algorithm { label: spec.label(), source: Box::new(e) })?;
        algorithms.push(summarize(spec, params, &trace, vhat, k));
        traces.push(trace);
    }
    let mut notes = Vec::new();
    if cfg.algorithms.iter().any(|a| a.kind == AlgorithmKind::SubgradientPush) {
        notes.push("Subgradient-Push update: X+ = C X - eta_k grad F(V^-1 X), eta_k = c / sqrt(k + 1)".into());
    }
    if let ObjectiveSpec::Logistic { data: None, synthetic_rows, synthetic_dim, .. } = &cfg.objective {
        notes.push(format!("synthetic logistic dataset: {synthetic_rows} rows, {synthetic_dim} features"));
    }
    let summary = ExperimentSummary {
        iterations: k,
        agents: problem.suite.n(),
        dim: problem.suite.dim(),
        edges: problem.graph.edge_count(),
        smoothness: problem.suite.smoothness(),
        strong_convexity: problem.suite.strong_convexity(),
        fstar: problem.minimizer.value,
        minimizer_grad_norm: problem.minimizer.grad_norm,
        norm: problem.norm.as_ref().map(|nt| NormSummary {
            delta: nt.delta(),
            theta: nt.theta(),
            epsilon: nt.epsilon(),
        }),
        algorithms,
        notes,
    };
    Ok(ExperimentResult { summary, traces, graph: problem.graph })
}

fn run_one(
    cfg: &ExperimentConfig,
    problem: &Problem,
    spec: &AlgorithmSpec,
    params: &ResolvedParams,
    k: usize,
) -> Result<(RunTrace, f64)> {
    let method = params.method();
    let mut rec = TraceRecorder::new(
        spec.label(),
        &problem.suite,
        &problem.mix,
        problem.minimizer.x.clone(),
        problem.minimizer.value,
    )
    .with_stride(cfg.record.stride())
    .with_final_iteration(k);
    if cfg.record.lyapunov {
        if let Some(nt) = &problem.norm {
            match method {
                Method::Apd(p) => rec = rec.with_lyapunov(nt, LyapunovSpec::Smooth(p)),
                Method::ApdSc(p) => rec = rec.with_lyapunov(nt, LyapunovSpec::StronglyConvex(p)),
                _ => {}
            }
        }
    }
    let out = method.run(problem.x0.clone(), problem.v0.clone(), &problem.mix, &problem.suite, k, &mut rec)?;
    Ok((rec.into_trace(), out.state.vhat_seen()))
}

/// Files written by [`run_experiment`].
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub traces: Vec<RunTrace>,
    pub files: Vec<PathBuf>,
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "loss.svg";
pub const GRAPH_FILE: &str = "graph.txt";
pub const CONFIG_FILE: &str = "config.toml";

/// Runs the experiment and writes one CSV per algorithm, `summary.json`,
/// `loss.svg`, the graph's edge list and the resolved config into
/// `out_dir`. Nothing is left behind if any step fails.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    let result = run_in_memory(cfg)?;
    let created_dir = !out_dir.exists();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let written = write_outputs(cfg, &result, out_dir, &mut files);
    if let Err(e) = written {
        for f in &files {
            let _ = std::fs::remove_file(f);
        }
        if created_dir {
            let _ = std::fs::remove_dir(out_dir);
        }
        return Err(e);
    }
    Ok(ExperimentOutcome { summary: result.summary, traces: result.traces, files })
}

fn write_outputs(
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    out: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    for (trace, alg) in result.traces.iter().zip(&result.summary.algorithms) {
        let path = out.join(&alg.trace_file);
        files.push(path.clone());
        emit_csv(trace, &path)?;
    }
    let path = out.join(SUMMARY_FILE);
    files.push(path.clone());
    let json = serde_json::to_string_pretty(&result.summary).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;

    let path = out.join(PLOT_FILE);
    files.push(path.clone());
    emit_svg_plot(&result.traces, &path, cfg.plot.axes)?;

    let path = out.join(GRAPH_FILE);
    files.push(path.clone());
    result.graph.write_edge_list(&path)?;

    let path = out.join(CONFIG_FILE);
    files.push(path.clone());
    std::fs::write(&path, cfg.to_toml()?).map_err(|e| Error::io(&path, e))?;
    Ok(())
}
