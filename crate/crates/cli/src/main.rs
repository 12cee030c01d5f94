use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apd_core::harness::{
    emit_svg_plot, read_trace_csv, reproduce_paper_experiment, run_experiment, AlgorithmSummary, Axes, Case,
    ExperimentConfig, ExperimentSummary, DEFAULT_ITERATIONS,
};
use apd_core::Error;
use clap::{Parser, Subcommand};

/// Decentralized optimization over directed graphs: accelerated Push-DIGing
/// and baselines.
#[derive(Parser)]
#[command(name = "apd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm listed in a TOML experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's output_dir, then results/<config name>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides init.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Logistic-regression comparison on 20 agents with fixed stepsizes.
    Reproduce {
        #[arg(long)]
        case: Case,
        /// Labeled CSV with at least 1000 rows; a synthetic dataset is used when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iters: usize,
    },
    /// Plot loss traces from CSV files into one SVG.
    Plot {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "semilogy")]
        axes: Axes,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is reserved for divergence here.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_divergence() { 2 } else { 1 })
        }
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.init.seed = seed;
            }
            let out = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| default_out(&config));
            let outcome = run_experiment(&cfg, &out)?;
            print_summary(&outcome.summary, &out);
        }
        Command::Reproduce { case, data, out, iters } => {
            let name = match case {
                Case::NonStrongly => "nonstrongly",
                Case::Strongly => "strongly",
            };
            let out = out.unwrap_or_else(|| Path::new("results").join(name));
            let rep = reproduce_paper_experiment(data.as_deref(), case, &out, iters)?;
            print_summary(&rep.summary, &out);
            let c = &rep.comparison;
            println!(
                "{} final gap {:.3e} vs Push-DIGing {:.3e}: {}",
                c.accelerated,
                c.accelerated_final_gap,
                c.push_diging_final_gap,
                if c.accelerated_not_worse { "not worse" } else { "worse" }
            );
            println!("Subgradient-Push excess over gradient tracking: {:.3e}", c.subgradient_push_excess);
        }
        Command::Plot { inputs, out, axes } => {
            let traces = inputs.iter().map(|p| read_trace_csv(p)).collect::<Result<Vec<_>, _>>()?;
            emit_svg_plot(&traces, &out, axes)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    Path::new("results").join(stem)
}

fn fmt_iters(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |k| k.to_string())
}

fn print_summary(s: &ExperimentSummary, out: &Path) {
    println!(
        "n = {}, dim = {}, K = {}, L = {:.4e}, mu = {:.4e}",
        s.agents, s.dim, s.iterations, s.smoothness, s.strong_convexity
    );
    println!("{:<24} {:>12} {:>8} {:>8} {:>8}", "algorithm", "final gap", "1e-6", "1e-10", "1e-14");
    for a in &s.algorithms {
        print_row(a);
    }
    println!("outputs in {}", out.display());
}

fn print_row(a: &AlgorithmSummary) {
    let it = |t: &str| fmt_iters(a.iterations_to.get(t).copied().flatten());
    println!("{:<24} {:>12.4e} {:>8} {:>8} {:>8}", a.label, a.final_gap, it("1e-6"), it("1e-10"), it("1e-14"));
}
