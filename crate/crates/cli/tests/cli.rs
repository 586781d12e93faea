use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubeinv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn modular_data_levels() {
    let o = run(&["modular-data", "--h", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["labels"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["S"].as_array().unwrap().len(), 3);
    assert_eq!(v["fusion"].as_array().unwrap().len(), 3);

    let v = json(&run(&["modular-data", "--h", "3"]));
    let d: Vec<f64> = v["d"].as_array().unwrap().iter().map(|x| x["approx"][0].as_f64().unwrap()).collect();
    assert_eq!(d, vec![1.0, -1.0]);

    let o = run(&["modular-data", "--h", "2"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn invariant_a3() {
    let o = run(&["invariant", "--quiver", "A3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["Z"], serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]]));
    assert_eq!(v["ciz_match"], "A3");
    assert_eq!(v["backend"], "exact");
    assert!(v["tolerance"].is_null());
    for k in ["T", "S", "haploid", "dim_condition"] {
        assert_eq!(v["checks"][k], true, "{k}");
    }
    assert!(v["checks"]["s_defect"].is_null());
}

#[test]
fn invariant_e6_float() {
    let o = run(&["invariant", "--quiver", "E6", "--backend", "float", "--tolerance", "1e-6"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["ciz_match"], "E6");
    assert_eq!(v["backend"], "float");
    assert_eq!(v["tolerance"], 1e-6);
    assert!(v["min_rank_gap"]["kept_min"].as_f64().unwrap() > 1e-6);
}

#[test]
fn invariant_disconnected_fixture_fails_haploid() {
    let o = run(&["invariant", "--quiver", &fixture("a2_disjoint.json")]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["Z"][0][0], 2);
    assert_eq!(v["checks"]["haploid"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("connected components"));
}

#[test]
fn diagonal_examples() {
    let v = json(&run(&["diagonal", "--quiver", "E8"]));
    let ones: Vec<usize> = v["diagonal"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.as_i64() == Some(1))
        .map(|(k, _)| k + 1)
        .collect();
    assert_eq!(ones, vec![1, 7, 11, 13, 17, 19, 23, 29]);
    assert_eq!(v["ciz_diagonal_match"], true);
    assert_eq!(json(&run(&["diagonal", "--quiver", "D4"]))["diagonal"], serde_json::json!([1, 0, 2, 0, 1]));
    assert_eq!(json(&run(&["diagonal", "--quiver", "A5"]))["diagonal"], serde_json::json!([1, 1, 1, 1, 1]));
}

#[test]
fn frobenius_examples() {
    for q in ["A3", "D4"] {
        let o = run(&["frobenius", "--quiver", q]);
        assert_eq!(code(&o), 0, "{q}");
        assert_eq!(json(&o)["all_pass"], true);
    }
    let o = run(&["frobenius", "--quiver", "E6"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exact backend required, h ≤ 6"));
    assert_eq!(code(&run(&["frobenius", "--quiver", "A3", "--backend", "float"])), 2);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(code(&run(&["invariant", "--quiver", "Q7"])), 2);
    assert_eq!(code(&run(&["invariant"])), 2);
    assert_eq!(code(&run(&["invariant", "--quiver", "A3", "--h", "5"])), 2);
    assert_eq!(code(&run(&["invariant", "--quiver", "A3", "--backend", "float", "--tolerance", "-1"])), 2);
    assert_eq!(code(&run(&["invariant", "--quiver", "A3", "--format", "yaml"])), 2);
    assert_eq!(code(&run(&["invariant", "--quiver", "E7"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["invariant", "--quiver", bad.to_str().unwrap()])), 2);
    // a triangle is symmetric but has no admissible eigenvector at h = 4
    let tri = dir.path().join("tri.json");
    std::fs::write(&tri, r#"{"name":"tri","vertices":["a","b","c"],"edges":[["a","b"],["b","c"],["c","a"]],"h":4}"#).unwrap();
    assert_eq!(code(&run(&["invariant", "--quiver", tri.to_str().unwrap()])), 2);
}

#[test]
fn output_is_deterministic_and_out_writes_file() {
    let args = ["invariant", "--quiver", "D5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    let o = run(&["invariant", "--quiver", "D5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn latex_and_pretty_formats() {
    let o = run(&["invariant", "--quiver", "D4", "--format", "latex"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "Z = |\\chi_{1} + \\chi_{5}|^2 + 2|\\chi_{3}|^2\n");
    let o = run(&["invariant", "--quiver", "D5", "--format", "latex"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("pmatrix"));
    let o = run(&["frobenius", "--quiver", "A3", "--format", "pretty"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("associativity") && !text.contains("FAIL"));
    let o = run(&["modular-data", "--h", "5", "--format", "pretty"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("fusion"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let plain = run(&["invariant", "--quiver", "D6"]);
    let capped = Command::new(env!("CARGO_BIN_EXE_tubeinv"))
        .args(["invariant", "--quiver", "D6"])
        .env("TUBEINV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(plain.stdout, capped.stdout);
}
