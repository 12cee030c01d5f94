use crate::diagnostics::RecordStride;
use crate::error::{Error, Result};
use crate::optimizers::DEFAULT_PRACTICAL_STEP;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Experiment description, read from TOML. See the README for the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub iterations: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_practical_step")]
    pub practical_step: f64,
    pub graph: GraphSpec,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub record: RecordSpec,
    #[serde(default)]
    pub plot: PlotSpec,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSpec>,
}

fn default_practical_step() -> f64 {
    DEFAULT_PRACTICAL_STEP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    /// Bidirected ring plus `extra_edges` random links.
    Random {
        n: usize,
        extra_edges: usize,
        #[serde(default)]
        seed: u64,
    },
    EdgeList {
        edge_list: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quadratic {
        dim: usize,
        kappa: f64,
        #[serde(default = "one")]
        mu_base: f64,
        #[serde(default)]
        seed: u64,
    },
    Logistic {
        /// CSV file; a synthetic dataset is generated when absent.
        #[serde(default)]
        data: Option<PathBuf>,
        #[serde(default)]
        mu: f64,
        #[serde(default)]
        partition_seed: u64,
        #[serde(default)]
        standardize: bool,
        /// Keep this many rows, drawn with `subsample_seed`.
        #[serde(default)]
        rows: Option<usize>,
        #[serde(default)]
        subsample_seed: u64,
        #[serde(default = "synthetic_rows")]
        synthetic_rows: usize,
        #[serde(default = "synthetic_dim")]
        synthetic_dim: usize,
        #[serde(default)]
        synthetic_seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

fn synthetic_rows() -> usize {
    1000
}

fn synthetic_dim() -> usize {
    4
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    /// Seed for the standard normal `X0`.
    #[serde(default)]
    pub seed: u64,
    /// Push-sum weights; all ones when absent.
    #[serde(default)]
    pub v0: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordSpec {
    #[serde(default = "one_usize")]
    pub every: usize,
    #[serde(default = "coarse_after")]
    pub coarse_after: usize,
    #[serde(default = "coarse_every")]
    pub coarse_every: usize,
    /// Record Lyapunov values for APD and APD-SC.
    #[serde(default)]
    pub lyapunov: bool,
}

fn one_usize() -> usize {
    1
}

fn coarse_after() -> usize {
    RecordStride::default().coarse_after
}

fn coarse_every() -> usize {
    RecordStride::default().coarse_every
}

impl Default for RecordSpec {
    fn default() -> Self {
        let s = RecordStride::default();
        RecordSpec { every: s.every, coarse_after: s.coarse_after, coarse_every: s.coarse_every, lyapunov: false }
    }
}

impl RecordSpec {
    pub fn stride(&self) -> RecordStride {
        RecordStride { every: self.every, coarse_after: self.coarse_after, coarse_every: self.coarse_every }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axes {
    LogLog,
    #[default]
    SemilogY,
}

impl std::str::FromStr for Axes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglog" => Ok(Axes::LogLog),
            "semilogy" => Ok(Axes::SemilogY),
            other => Err(Error::Config(format!("unknown axes `{other}`, expected loglog or semilogy"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    #[serde(default)]
    pub axes: Axes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Apd,
    ApdSc,
    PushDiging,
    SubgradientPush,
}

impl AlgorithmKind {
    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmKind::Apd => "APD",
            AlgorithmKind::ApdSc => "APD-SC",
            AlgorithmKind::PushDiging => "Push-DIGing",
            AlgorithmKind::SubgradientPush => "Subgradient-Push",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    Auto,
    Theoretical,
}

/// Explicit parameter block; which fields are required depends on the algorithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    pub eta: Option<f64>,
    pub pa: Option<f64>,
    pub wa: Option<f64>,
    pub wb: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub step_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamChoice {
    Mode(ParamMode),
    Explicit(ExplicitParams),
}

impl Default for ParamChoice {
    fn default() -> Self {
        ParamChoice::Mode(ParamMode::Auto)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub params: ParamChoice,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind, params: ParamChoice) -> Self {
        AlgorithmSpec { kind, label: None, params }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.display_name().to_string())
    }
}

/// File-name stem for a label: lowercase ASCII alphanumerics joined by `-`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "trace".into()
    } else {
        out
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config; relative paths inside it are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.check_files()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GraphSpec::EdgeList { edge_list } = &mut self.graph {
            fix(edge_list);
        }
        if let ObjectiveSpec::Logistic { data: Some(d), .. } = &mut self.objective {
            fix(d);
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    pub fn check_files(&self) -> Result<()> {
        let mut files = Vec::new();
        if let GraphSpec::EdgeList { edge_list } = &self.graph {
            files.push(edge_list);
        }
        if let ObjectiveSpec::Logistic { data: Some(d), .. } = &self.objective {
            files.push(d);
        }
        match files.into_iter().find(|f| !f.is_file()) {
            Some(f) => Err(Error::Config(format!("referenced file {} does not exist", f.display()))),
            None => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one [[algorithm]] is required".into());
        }
        if !(self.practical_step > 0.0) {
            return bad(format!("practical_step must be positive, got {}", self.practical_step));
        }
        if self.record.every == 0 || self.record.coarse_every == 0 {
            return bad("record strides must be positive".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.algorithms {
            if !seen.insert(slug(&a.label())) {
                return bad(format!("duplicate algorithm label `{}`", a.label()));
            }
            if matches!(a.params, ParamChoice::Mode(ParamMode::Theoretical))
                && matches!(a.kind, AlgorithmKind::PushDiging | AlgorithmKind::SubgradientPush)
            {
                return bad(format!("{} has no theoretical parameter mode", a.kind.display_name()));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
