use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples").join(name)
}

fn run(args: &[&str], input: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indefgraph"))
        .args(args)
        .arg("--input")
        .arg(input)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("error JSON on stderr")
}

#[test]
fn spectrum_first_row_is_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum"], &example("dirichlet_edge.json"), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("branch_index,lambda"));
    let (idx, val) = lines.next().unwrap().split_once(',').unwrap();
    assert_eq!(idx, "1");
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((val.parse::<f64>().unwrap() - pi2).abs() / pi2 < 5e-4);
    let ef = fs::read_to_string(dir.path().join("eigenfunctions/branch_1.csv")).unwrap();
    assert!(ef.starts_with("edge_id,x,value\n"));
}

#[test]
fn neumann_zero_potential_is_a_hypothesis_violation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fs::read_to_string(example("dirichlet_edge.json")).unwrap().replace("dirichlet", "robin");
    let input = dir.path().join("neumann.json");
    fs::write(&input, spec).unwrap();
    let o = run(&["spectrum"], &input, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "hypothesis");
    assert!(e["message"].as_str().unwrap().contains("L not positive definite"));
}

#[test]
fn verify_all_passes_on_pm_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify-all", "--mesh", "32"], &example("pm_path.json"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["spectrum", "oracle", "krein", "bracket", "asymptotics"]);
    for f in ["krein.json", "gram.csv", "bracket.csv", "bracket.json", "asymptotics.json", "asymptotics.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["spectrum", "krein", "bracket", "oracle"] {
        for d in [&a, &b] {
            let o = run(&[cmd, "--mesh", "16", "--probes", "20", "--seed", "7"], &example("star3.json"), d.path());
            assert!(o.status.success(), "{cmd}");
        }
    }
    for f in ["spectrum.csv", "krein.json", "gram.csv", "bracket.csv", "bracket.json", "oracle.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let krein = fs::read_to_string(a.path().join("krein.json")).unwrap();
    assert!(krein.contains("e0,") || krein.contains("e0\n"));
}

#[test]
fn oracle_window_lists_double_roots_twice() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["oracle", "--window", "0:12"], &example("star3.json"), dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    let vals: Vec<f64> = csv.lines().skip(1).map(|l| l.split_once(',').unwrap().1.parse().unwrap()).collect();
    assert_eq!(vals.len(), 3);
    assert!((vals[1] - vals[2]).abs() < 1e-9);
}

#[test]
fn missing_input_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum"], &dir.path().join("absent.json"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn invalid_graph_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.json");
    fs::write(&input, r#"{"edges":[{"id":"e","start":"a","end":"b","weight":2,"mesh":8}],"vertices":[]}"#).unwrap();
    let o = run(&["spectrum"], &input, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "validation");
}

#[test]
fn empty_window_and_small_mesh_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = example("dirichlet_edge.json");
    assert_eq!(run(&["oracle", "--window", "5:5"], &input, dir.path()).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--mesh", "1"], &input, dir.path()).status.code(), Some(2));
}
