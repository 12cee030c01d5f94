//! Config-driven experiments: build the network and objectives, run the
//! solvers side by side and write CSV traces, a JSON summary and an SVG plot.

mod config;
mod csv;
mod reproduce;
mod run;
mod svg;

pub use config::{
    slug, AlgorithmKind, AlgorithmSpec, Axes, ExperimentConfig, ExplicitParams, GraphSpec, InitSpec, ObjectiveSpec,
    ParamChoice, ParamMode, PlotSpec, RecordSpec,
};
pub use csv::{emit_csv, parse_trace_csv, read_trace_csv, trace_to_csv, TRACE_HEADER};
pub use reproduce::{
    reproduce_paper_experiment, reproduction_config, Case, Comparison, Reproduction, COMPARISON_FILE,
    DEFAULT_ITERATIONS,
};
pub use run::{
    resolve_params, run_experiment, run_in_memory, settled_below, AlgorithmSummary, ExperimentOutcome,
    ExperimentResult, ExperimentSummary, NormSummary, Problem, ResolvedParams, CALIBRATION_STEPS, CONFIG_FILE,
    GRAPH_FILE, PLOT_FILE, SUMMARY_FILE, THRESHOLDS,
};
pub use svg::{emit_svg_plot, render_svg, PLOT_FLOOR};

#[cfg(test)]
mod tests;
