use std::path::Path;
use std::process::{Command, Output};

fn trace_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trace-lab"))
        .args(args)
        .env_remove("TRACE_LAB_OUTPUT_DIR")
        .env_remove("TRACE_LAB_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.json");
    std::fs::write(&path, body.replace("OUT", dir.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_writes_parseable_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.txt");
    let o = trace_lab(&["gen", "random-regular", "-n", "20", "-d", "4", "--seed", "5", "-o", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = trace_lab::Graph::parse_edge_list(std::fs::read(&file).unwrap().as_slice()).unwrap();
    assert_eq!((g.n(), g.edge_count(), g.regular_degree()), (20, 40, Some(4)));

    let again = trace_lab(&["gen", "random-regular", "-n", "20", "-d", "4", "--seed", "5"]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&file).unwrap());

    let spec = trace_lab(&["spectral", "-g", file.to_str().unwrap()]);
    assert!(spec.status.success());
    assert!(stdout(&spec).contains("lambda"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(trace_lab(&["gen", "random-regular", "-n", "20"]).status.code(), Some(1));
    assert_eq!(trace_lab(&["gen", "random-regular", "-n", "5", "-d", "3"]).status.code(), Some(1));
    assert_eq!(trace_lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(trace_lab(&["spectral", "-g", "/nonexistent/graph.txt"]).status.code().map(|c| c != 0), Some(true));
    assert_eq!(trace_lab(&["--help"]).status.code(), Some(0));
    let bad_ratio = trace_lab(&["bounds", "-n", "100", "-d", "16", "--ratios", "2,0.5"]);
    assert_eq!(bad_ratio.status.code(), Some(1));
    assert!(bad_ratio.stdout.is_empty());
}

#[test]
fn experiment_outputs_and_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"schema_version": 1, "experiment": "cover", "graph": {"family": "complete", "n": 10},
        "n_values": [10, 20], "trials": 200, "seed": 4, "output": {"dir": "OUT", "name": "k"},
        "expect": [{"stat": "mean", "min": 1, "max": 1000}]}"#;
    let cfg = write_config(dir.path(), body);
    let o = trace_lab(&["experiment", "--config", &cfg, "--check", "--plot", "mean-vs-n", "--plot", "histogram"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["checks_passed"], true);
    assert!(dir.path().join("k.csv").exists());
    assert!(dir.path().join("k.summary.json").exists());
    assert!(report["plots"].as_array().unwrap().len() >= 3);

    let failing = body.replace(r#""max": 1000"#, r#""max": 2"#);
    let cfg = write_config(dir.path(), &failing);
    assert_eq!(trace_lab(&["experiment", "--config", &cfg, "--check"]).status.code(), Some(3));
    assert_eq!(trace_lab(&["experiment", "--config", &cfg]).status.code(), Some(0));

    let unknown_plot = trace_lab(&["experiment", "--config", &cfg, "--plot", "scatter"]);
    assert_eq!(unknown_plot.status.code(), Some(1));

    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "experiment": "cover"}"#);
    assert_eq!(trace_lab(&["experiment", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn bounds_sweep_writes_one_row_per_grid_point() {
    let o = trace_lab(&["bounds", "-n", "100", "-d", "16", "--ratios", "2,4", "--n-values", "100,200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("n,d,lambda,eps,h_lower,h_upper,cover_upper"));
}

#[test]
fn hamilton_cycle_on_petersen_is_absent() {
    let o = trace_lab(&["hamilton", "cycle", "--family", "petersen"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("absent"), "{}", stdout(&o));
}
