use super::config::{
    AlgorithmKind, AlgorithmSpec, ExperimentConfig, ExplicitParams, GraphSpec, InitSpec, ObjectiveSpec, ParamChoice,
    PlotSpec, RecordSpec,
};
use super::run::{run_experiment, ExperimentSummary};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const AGENTS: usize = 20;
pub const EXTRA_LINKS: usize = 50;
pub const ROWS: usize = 1000;
pub const DEFAULT_ITERATIONS: usize = 3000;
pub const COMPARISON_FILE: &str = "comparison.json";

const GRAPH_SEED: u64 = 7;
const PARTITION_SEED: u64 = 3;
const SUBSAMPLE_SEED: u64 = 1;
const SYNTHETIC_SEED: u64 = 11;
const INIT_SEED: u64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Plain logistic loss, accelerated method for smooth objectives.
    NonStrongly,
    /// Logistic loss plus `0.05/2‖x‖²`, accelerated strongly convex method.
    Strongly,
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonstrongly" => Ok(Case::NonStrongly),
            "strongly" => Ok(Case::Strongly),
            other => Err(Error::Config(format!("unknown case `{other}`, expected nonstrongly or strongly"))),
        }
    }
}

fn explicit(kind: AlgorithmKind, p: ExplicitParams) -> AlgorithmSpec {
    AlgorithmSpec::new(kind, ParamChoice::Explicit(p))
}

/// The logistic-regression comparison: 20 agents on a bidirected ring with
/// 50 extra links, 50 rows per agent, fixed hand-tuned stepsizes. Without a
/// data file a synthetic 1000-row dataset is used.
pub fn reproduction_config(case: Case, data: Option<PathBuf>, iterations: usize) -> ExperimentConfig {
    let accelerated = match case {
        Case::NonStrongly => explicit(
            AlgorithmKind::Apd,
            ExplicitParams { eta: Some(0.012), pa: Some(0.92), wa: Some(0.006), wb: Some(1.0), ..Default::default() },
        ),
        Case::Strongly => explicit(
            AlgorithmKind::ApdSc,
            ExplicitParams {
                eta: Some(0.0125),
                alpha: Some(6.0),
                beta: Some(0.1),
                tau: Some(0.1),
                ..Default::default()
            },
        ),
    };
    ExperimentConfig {
        iterations,
        output_dir: None,
        practical_step: crate::optimizers::DEFAULT_PRACTICAL_STEP,
        graph: GraphSpec::Random { n: AGENTS, extra_edges: EXTRA_LINKS, seed: GRAPH_SEED },
        objective: ObjectiveSpec::Logistic {
            data,
            mu: if case == Case::Strongly { 0.05 } else { 0.0 },
            partition_seed: PARTITION_SEED,
            standardize: false,
            rows: Some(ROWS),
            subsample_seed: SUBSAMPLE_SEED,
            synthetic_rows: ROWS,
            synthetic_dim: 4,
            synthetic_seed: SYNTHETIC_SEED,
        },
        init: InitSpec { seed: INIT_SEED, v0: None },
        record: RecordSpec::default(),
        plot: PlotSpec::default(),
        algorithms: vec![
            accelerated,
            explicit(AlgorithmKind::PushDiging, ExplicitParams { eta: Some(0.025), ..Default::default() }),
            explicit(AlgorithmKind::SubgradientPush, ExplicitParams { step_c: Some(0.18), ..Default::default() }),
        ],
    }
}

/// Qualitative comparison of the three methods at the final iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub case: Case,
    pub accelerated: String,
    pub accelerated_final_gap: f64,
    pub push_diging_final_gap: f64,
    pub subgradient_push_final_gap: f64,
    /// Accelerated final gap is at most the Push-DIGing final gap.
    pub accelerated_not_worse: bool,
    pub accelerated_iterations_to_1e_12: Option<usize>,
    pub accelerated_iterations_to_1e_14: Option<usize>,
    pub push_diging_iterations_to_1e_14: Option<usize>,
    /// Subgradient-Push gap divided by the larger gradient-tracking gap.
    pub subgradient_push_excess: f64,
}

#[derive(Debug)]
pub struct Reproduction {
    pub summary: ExperimentSummary,
    pub comparison: Comparison,
    pub files: Vec<PathBuf>,
}

/// Runs [`reproduction_config`] into `out_dir` and writes `comparison.json` next to
/// the usual experiment outputs.
pub fn reproduce_paper_experiment(
    data: Option<&Path>,
    case: Case,
    out_dir: &Path,
    iterations: usize,
) -> Result<Reproduction> {
    let cfg = reproduction_config(case, data.map(Path::to_path_buf), iterations);
    cfg.check_files()?;
    let outcome = run_experiment(&cfg, out_dir)?;
    let gap = |i: usize| outcome.summary.algorithms[i].final_gap;
    let first = |i: usize, t: f64| outcome.traces[i].iterations_to(t);
    let (acc, pd, sp) = (gap(0), gap(1), gap(2));
    let comparison = Comparison {
        case,
        accelerated: outcome.summary.algorithms[0].label.clone(),
        accelerated_final_gap: acc,
        push_diging_final_gap: pd,
        subgradient_push_final_gap: sp,
        accelerated_not_worse: acc <= pd,
        accelerated_iterations_to_1e_12: first(0, 1e-12),
        accelerated_iterations_to_1e_14: first(0, 1e-14),
        push_diging_iterations_to_1e_14: first(1, 1e-14),
        subgradient_push_excess: sp / acc.max(pd).max(f64::MIN_POSITIVE),
    };
    let path = out_dir.join(COMPARISON_FILE);
    let json = serde_json::to_string_pretty(&comparison).map_err(|e| Error::Config(e.to_string()))?;
    if let Err(e) = std::fs::write(&path, json + "\n") {
        for f in &outcome.files {
            let _ = std::fs::remove_file(f);
        }
        return Err(Error::io(&path, e));
    }
    let mut files = outcome.files;
    files.push(path);
    Ok(Reproduction { summary: outcome.summary, comparison, files })
}
