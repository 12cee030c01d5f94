use super::*;
use crate::diagnostics::{RunTrace, TraceRecord};
use std::path::Path;

const BASIC: &str = r#"
iterations = 60

[graph]
n = 6
extra_edges = 5
seed = 2

[objective]
kind = "quadratic"
dim = 3
kappa = 20.0
mu_base = 0.1
seed = 4

[init]
seed = 9

[[algorithm]]
kind = "apd"

[[algorithm]]
kind = "push-diging"

[[algorithm]]
kind = "subgradient-push"
params = { step_c = 0.5 }
"#;

fn record(k: usize, loss: f64) -> TraceRecord {
    TraceRecord {
        k,
        loss,
        consensus_error: 0.5,
        projection_error: 0.25,
        grad_avg_norm: 1.0 / 3.0,
        phi1: None,
        phi2: Some(std::f64::consts::PI),
        phi3: None,
        phi4: None,
        v_min: 0.1,
    }
}

fn trace(label: &str, losses: &[(usize, f64)]) -> RunTrace {
    RunTrace { label: label.into(), records: losses.iter().map(|&(k, l)| record(k, l)).collect() }
}

#[test]
fn parses_basic_config() {
    let cfg = ExperimentConfig::parse(BASIC).unwrap();
    assert_eq!(cfg.iterations, 60);
    assert_eq!(cfg.algorithms.len(), 3);
    assert_eq!(cfg.algorithms[0].params, ParamChoice::Mode(ParamMode::Auto));
    assert_eq!(cfg.algorithms[2].label(), "Subgradient-Push");
    assert!(matches!(cfg.algorithms[2].params, ParamChoice::Explicit(ExplicitParams { step_c: Some(_), .. })));
    assert_eq!(cfg.plot.axes, Axes::SemilogY);
    let again = ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn rejects_invalid_configs() {
    let cases = [
        BASIC.replace("iterations = 60", "iterations = 0"),
        BASIC.replace("iterations = 60", "iterations = 60\nbogus = 1"),
        BASIC.replace("kind = \"subgradient-push\"", "kind = \"apd\""),
        BASIC.replace("kind = \"push-diging\"", "kind = \"push-diging\"\nparams = \"theoretical\""),
        BASIC.replace("kind = \"apd\"", "kind = \"nesterov\""),
        "iterations = 5\n[graph]\nn = 3\nextra_edges = 0\n[objective]\nkind = \"quadratic\"\ndim = 2\nkappa = 2.0\n"
            .into(),
    ];
    for text in cases {
        assert!(matches!(ExperimentConfig::parse(&text), Err(crate::Error::Config(_))), "{text}");
    }
}

#[test]
fn load_resolves_relative_paths_and_checks_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASIC.replace("[graph]\nn = 6\nextra_edges = 5\nseed = 2", "[graph]\nedge_list = \"g.txt\"");
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, &text).unwrap();
    let err = ExperimentConfig::load(&path).unwrap_err();
    assert!(err.to_string().contains("g.txt"), "{err}");
    crate::graph::DirectedGraph::cycle_plus_random(6, 5, 2)
        .unwrap()
        .write_edge_list(&dir.path().join("g.txt"))
        .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.graph, GraphSpec::EdgeList { edge_list: dir.path().join("g.txt") });
    let res = run_in_memory(&cfg).unwrap();
    assert_eq!(res.graph.n(), 6);
}

#[test]
fn resolves_parameters_per_algorithm() {
    let cfg = ExperimentConfig::parse(BASIC).unwrap();
    let problem = Problem::build(&cfg).unwrap();
    let l = problem.suite.smoothness();
    let apd = resolve_params(&cfg.algorithms[0], &problem, 0.3).unwrap();
    assert_eq!(apd, ResolvedParams::Apd { eta: 0.3 / l, pa: 0.25, wa: 0.25, wb: 1.0 });
    let pd = resolve_params(&cfg.algorithms[1], &problem, 0.3).unwrap();
    assert_eq!(pd, ResolvedParams::PushDiging { eta: 0.3 / l });

    let mut bad = cfg.algorithms[1].clone();
    bad.params = ParamChoice::Explicit(ExplicitParams { pa: Some(0.5), ..Default::default() });
    assert!(resolve_params(&bad, &problem, 0.3).is_err());
    let mut partial = AlgorithmSpec::new(
        AlgorithmKind::ApdSc,
        ParamChoice::Explicit(ExplicitParams { eta: Some(0.1), ..Default::default() }),
    );
    assert!(resolve_params(&partial, &problem, 0.3).is_err());
    partial.params = ParamChoice::Mode(ParamMode::Auto);
    match resolve_params(&partial, &problem, 0.3).unwrap() {
        ResolvedParams::ApdSc { alpha, tau, .. } => assert!((alpha * tau - 1.0 / 12.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn theoretical_mode_builds_the_norm() {
    let text = BASIC.replace("kind = \"apd\"", "kind = \"apd\"\nparams = \"theoretical\"");
    let res = run_in_memory(&ExperimentConfig::parse(&text).unwrap()).unwrap();
    let norm = res.summary.norm.unwrap();
    assert!(norm.delta > 0.0 && norm.theta >= 1.0);
    match res.summary.algorithms[0].params {
        ResolvedParams::Apd { eta, .. } => assert!(eta > 0.0 && eta < 0.3 / res.summary.smoothness),
        other => panic!("{other:?}"),
    }
}

#[test]
fn single_iteration_traces_hold_two_records() {
    let text = BASIC.replace("iterations = 60", "iterations = 1");
    let res = run_in_memory(&ExperimentConfig::parse(&text).unwrap()).unwrap();
    for t in &res.traces {
        assert_eq!(t.records.iter().map(|r| r.k).collect::<Vec<_>>(), vec![0, 1]);
    }
}

#[test]
fn shared_initialization_and_lyapunov_columns() {
    let text = BASIC.replace("[init]", "[record]\nlyapunov = true\n\n[init]");
    let res = run_in_memory(&ExperimentConfig::parse(&text).unwrap()).unwrap();
    let first: Vec<&TraceRecord> = res.traces.iter().map(|t| &t.records[0]).collect();
    for r in &first[1..] {
        assert_eq!(r.loss, first[0].loss);
        assert_eq!(r.consensus_error, first[0].consensus_error);
    }
    assert!(res.traces[0].records.iter().all(|r| r.phi1.is_some() && r.phi2.is_some() && r.phi3.is_none()));
    assert!(res.traces[1].records.iter().all(|r| r.phi1.is_none()));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn experiment_outputs_are_complete_and_deterministic() {
    let cfg = ExperimentConfig::parse(BASIC).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_experiment(&cfg, a.path()).unwrap();
    run_experiment(&cfg, b.path()).unwrap();
    let names: Vec<String> = read_all(a.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        ["apd.csv", "config.toml", "graph.txt", "loss.svg", "push-diging.csv", "subgradient-push.csv", "summary.json"]
    );
    assert_eq!(read_all(a.path()), read_all(b.path()));
    assert_eq!(out.files.len(), 7);

    let summary: ExperimentSummary =
        serde_json::from_str(&std::fs::read_to_string(a.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary, out.summary);
    for alg in &summary.algorithms {
        let t = read_trace_csv(&a.path().join(&alg.trace_file)).unwrap();
        for th in THRESHOLDS {
            assert_eq!(alg.iterations_to[&format!("{th:e}")], t.iterations_to(th));
            assert_eq!(alg.settled_below[&format!("{th:e}")], settled_below(&t, th));
        }
        assert_eq!(alg.final_gap, t.final_loss().unwrap());
    }
    let svg = std::fs::read_to_string(a.path().join(PLOT_FILE)).unwrap();
    let order: Vec<usize> =
        ["APD", "Push-DIGing", "Subgradient-Push"].iter().map(|l| svg.find(&format!(">{l}<")).unwrap()).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn divergence_leaves_no_outputs() {
    let text = BASIC.replace("params = { step_c = 0.5 }", "params = { step_c = 0.5 }\n\n[[algorithm]]\nkind = \"push-diging\"\nlabel = \"hot\"\nparams = { eta = 1e3 }")
        .replace("iterations = 60", "iterations = 2000");
    let cfg = ExperimentConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let err = run_experiment(&cfg, &out).unwrap_err();
    assert!(err.is_divergence(), "{err}");
    assert!(err.to_string().starts_with("hot:"));
    assert!(!out.exists());
}

#[test]
fn csv_format() {
    let empty = RunTrace::new("x");
    assert_eq!(trace_to_csv(&empty), format!("{TRACE_HEADER}\n"));
    let t = trace("x", &[(0, 1.0), (3, 1.0 / 7.0), (10, -2.5e-300)]);
    let text = trace_to_csv(&t);
    let lines: Vec<&str> = text.split('\n').collect();
    assert!(lines[1].starts_with("0,1"));
    assert_eq!(lines[1].split(',').filter(|f| f.is_empty()).count(), 3);
    assert!(!text.contains('\r'));
    let back = parse_trace_csv(&text, "x", Path::new("mem")).unwrap();
    assert_eq!(back, t);
}

#[test]
fn csv_parse_errors_name_the_line() {
    let text = format!("{TRACE_HEADER}\n0,1,1,1,1,,,,,1\n1,oops,1,1,1,,,,,1\n");
    match parse_trace_csv(&text, "x", Path::new("t.csv")) {
        Err(crate::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(parse_trace_csv("k,loss\n", "x", Path::new("t.csv")).is_err());
    let text = format!("{TRACE_HEADER}\n2,1,1,1,1,,,,,1\n1,1,1,1,1,,,,,1\n");
    assert!(parse_trace_csv(&text, "x", Path::new("t.csv")).is_err());
}

#[test]
fn svg_structure() {
    let one = trace("only", &[(0, 1.0), (1, 0.5), (2, 0.1)]);
    let svg = render_svg(std::slice::from_ref(&one), Axes::SemilogY).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));

    let wide = trace("wide", &[(1, 1.0), (10, 1e-7), (100, 1e-14)]);
    let svg = render_svg(std::slice::from_ref(&wide), Axes::SemilogY).unwrap();
    for d in 0..=14 {
        assert!(svg.contains(&format!(">1e-{d}<")) || (d == 0 && svg.contains(">1e0<")), "missing 1e-{d}");
    }
    assert_eq!(svg.matches("class=\"ytick\"").count(), 15);
    let svg = render_svg(std::slice::from_ref(&wide), Axes::LogLog).unwrap();
    assert_eq!(svg.matches("class=\"xtick\"").count(), 3);

    let three: Vec<RunTrace> = ["b", "a", "c"].iter().map(|l| trace(l, &[(0, 1.0), (5, 1e-3)])).collect();
    let svg = render_svg(&three, Axes::SemilogY).unwrap();
    let legend: Vec<usize> = ["b", "a", "c"].iter().map(|l| svg.find(&format!(">{l}</text>")).unwrap()).collect();
    assert!(legend.windows(2).all(|w| w[0] < w[1]));
    assert!(render_svg(&[RunTrace::new("e")], Axes::SemilogY).is_err());

    let floor = trace("f", &[(0, 1.0), (1, 0.0), (2, -1e-20)]);
    assert!(render_svg(&[floor], Axes::SemilogY).unwrap().contains(">1e-17<"));
}

#[test]
fn slugs() {
    assert_eq!(slug("Push-DIGing"), "push-diging");
    assert_eq!(slug("APD (eta = 0.1)"), "apd-eta-0-1");
    assert_eq!(slug("***"), "trace");
}

#[test]
fn reproduction_config_matches_protocol() {
    let cfg = reproduction_config(Case::Strongly, None, 3000);
    cfg.validate().unwrap();
    assert_eq!(cfg.iterations, 3000);
    assert_eq!(cfg.graph, GraphSpec::Random { n: 20, extra_edges: 50, seed: 7 });
    let kinds: Vec<AlgorithmKind> = cfg.algorithms.iter().map(|a| a.kind).collect();
    assert_eq!(kinds, [AlgorithmKind::ApdSc, AlgorithmKind::PushDiging, AlgorithmKind::SubgradientPush]);
    assert_eq!(
        cfg.algorithms[0].params,
        ParamChoice::Explicit(ExplicitParams {
            eta: Some(0.0125),
            alpha: Some(6.0),
            beta: Some(0.1),
            tau: Some(0.1),
            ..Default::default()
        })
    );
    let problem = Problem::build(&cfg).unwrap();
    let resolved = resolve_params(&cfg.algorithms[0], &problem, 0.3).unwrap();
    assert_eq!(resolved, ResolvedParams::ApdSc { eta: 0.0125, alpha: 6.0, beta: 0.1, tau: 0.1 });
    assert_eq!(problem.suite.n(), 20);
    assert!(problem.suite.shards().unwrap().iter().all(|s| s.len() == 50));
}

#[test]
fn reproduction_needs_enough_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    std::fs::write(&data, "1,2,0\n3,4,1\n").unwrap();
    let err = reproduce_paper_experiment(Some(&data), Case::NonStrongly, &dir.path().join("o"), 5).unwrap_err();
    assert!(matches!(err, crate::Error::Config(_)), "{err}");
    assert!(!dir.path().join("o").exists());
}
