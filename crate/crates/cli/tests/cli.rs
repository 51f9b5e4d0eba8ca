use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cluster-quake"))
        .args(args)
        .env_remove("CLUSTER_QUAKE_CAP")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn cartan_g2() {
    let v = json(&["cartan", "--type", "G2"]);
    assert_eq!(v["entries"], serde_json::json!([[0, -1], [3, 0]]));
    assert_eq!(v["d"], serde_json::json!([1, 3]));
}

#[test]
fn enumerate_json_shape() {
    let v = json(&["enumerate", "--type", "A2", "--json"]);
    let vertices = v["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 10);
    for key in ["id", "eps", "C", "G", "F"] {
        assert!(vertices[0].get(key).is_some(), "missing {key}");
    }
    assert!(!v["edges"].as_array().unwrap().is_empty());
}

#[test]
fn fan_counts() {
    for (ty, n) in [("A2", 5), ("B2", 6), ("G2", 8), ("A3", 14)] {
        assert_eq!(json(&["fan", "--type", ty]).as_array().unwrap().len(), n, "{ty}");
    }
}

#[test]
fn quake_and_inverse() {
    let q = json(&["quake", "--type", "A2", "--g0", "1,1", "--L", "-1,0"]);
    let g = floats(&q["g"]["coords"]);
    assert!((g[0] - (-1f64).exp()).abs() < 1e-12);
    let g_arg = format!("{},{}", g[0], g[1]);
    let l = json(&["inverse", "--type", "A2", "--g0", "1,1", "--g", &g_arg]);
    let x = floats(&l["coords"]);
    assert!((x[0] + 1.0).abs() < 1e-9 && x[1].abs() < 1e-9, "{x:?}");
}

#[test]
fn dquake_matches_table_entry() {
    let d = json(&["dquake", "--type", "G2", "--L", "2,-3"]);
    let xi = floats(&d["delta"]);
    assert!(xi[0].abs() < 1e-9 && (xi[1] + 2.0).abs() < 1e-9, "{xi:?}");
}

#[test]
fn limits_report_residuals() {
    let l = json(&["limits", "--type", "A2", "--mode", "L", "--t", "1000"]);
    let rows = l.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["residual"].as_f64().unwrap() <= 1e-2));
    let g = json(&["limits", "--type", "B2", "--mode", "g", "--M", "30"]);
    assert!(g.as_array().unwrap().iter().all(|r| r["residual"].as_f64().unwrap() <= 1e-3));
}

#[test]
fn horocycle_report() {
    let h = json(&["horocycle", "--type", "A2", "--g", "1,1", "--L", "0.3,0.7", "--t", "2.5"]);
    assert!(h["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn plot_grid_csv_is_deterministic() {
    let args = ["plot-grid", "--type", "B2", "--range", "-6", "6", "--step", "0.5", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,cone,logX1,logX2,u1,u2");
    assert_eq!(lines.count(), 25 * 25);
}

#[test]
fn plot_grid_rejects_rank_three() {
    let out = run(&["plot-grid", "--type", "A3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank 2"));
}

#[test]
fn custom_matrix_input() {
    let v = json(&["enumerate", "--matrix", r#"{"n":2,"entries":[[0,-1],[2,0]],"d":[1,2]}"#]);
    assert_eq!(v["cones"], 6);
}

#[test]
fn cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cluster-quake"))
        .args(["enumerate", "--type", "A3"])
        .env("CLUSTER_QUAKE_CAP", "5")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget of 5"));
}

#[test]
fn verify_exit_status_and_determinism() {
    let a = run(&["verify", "all", "--type", "A2,G2", "--seed", "11", "--samples", "50"]);
    let b = run(&["verify", "all", "--type", "A2,G2", "--seed", "11", "--samples", "50"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(!run(&["verify", "nonsense"]).status.success());
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("cq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fan.json");
    let out = run(&["fan", "--type", "A2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    std::fs::remove_dir_all(dir).unwrap();
}
