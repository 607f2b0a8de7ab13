use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn params(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/params")
        .join(name)
}

fn acg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acg"))
        .current_dir(dir)
        .env_remove("ACG_SEED")
        .args(args)
        .output()
        .expect("acg runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn exact_mean_prints_four_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let o = acg(
        dir.path(),
        &[
            "exact",
            "mean",
            "--params",
            p.to_str().unwrap(),
            "--margins",
            "1,2:1,2",
            "--type",
            "2,2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.3333333333");
    let result = read_json(&dir.path().join("result.json"));
    assert!(result["route_gap"].as_f64().unwrap() < 1e-12);
    assert!(dir.path().join("meta.json").exists());
}

#[test]
fn exact_var_and_joint() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let p = p.to_str().unwrap();
    let o = acg(
        dir.path(),
        &[
            "exact",
            "var",
            "--params",
            p,
            "--margins",
            "1,2:1,2",
            "--type",
            "2,2",
        ],
    );
    assert_eq!(stdout(&o).trim(), "0.2222222222");
    let o = acg(
        dir.path(),
        &[
            "exact",
            "joint",
            "--params",
            p,
            "--margins",
            "1,2:1,2",
            "--types",
            "2,2",
        ],
    );
    assert_eq!(stdout(&o).trim(), "0.4444444444");
}

#[test]
fn oracle_reports_table_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_disassortative.json");
    let o = acg(
        dir.path(),
        &[
            "exact",
            "oracle",
            "--params",
            p.to_str().unwrap(),
            "--margins",
            "1,2:1,2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["wirings"], 36);
    let counts: Vec<&str> = v["tables"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["wiring_count"].as_str().unwrap())
        .collect();
    assert!(counts.contains(&"12") && counts.contains(&"24"));
}

#[test]
fn generate_writes_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let o = acg(
        dir.path(),
        &[
            "generate",
            "--params",
            p.to_str().unwrap(),
            "--n",
            "500",
            "--seed",
            "7",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let nodes = fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    let edges = fs::read_to_string(dir.path().join("edges.tsv")).unwrap();
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(nodes.lines().next(), Some("id,j,k"));
    assert_eq!(nodes.lines().count(), 501);
    assert_eq!(
        edges.lines().next(),
        Some("edge_id\tsrc\tdst\tk\tj\tself_loop")
    );

    let mut in_deg = vec![0usize; 500];
    let mut out_deg = vec![0usize; 500];
    for line in edges.lines().skip(1) {
        let f: Vec<usize> = line.split('\t').map(|x| x.parse().unwrap()).collect();
        out_deg[f[1]] += 1;
        in_deg[f[2]] += 1;
        assert_eq!(f[5], usize::from(f[1] == f[2]));
    }
    for line in nodes.lines().skip(1) {
        let f: Vec<usize> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!((in_deg[f[0]], out_deg[f[0]]), (f[1], f[2]));
    }
    assert_eq!(meta["seed"], 7);
    for key in ["D", "clip_count", "restarts", "e_kj"] {
        assert!(meta.get(key).is_some(), "meta.json lacks {key}");
    }
    let total: u64 = meta["e_kj"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()))
        .sum();
    assert_eq!(total as usize, edges.lines().count() - 1);
}

#[test]
fn generate_many_samples_uses_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_disassortative.json");
    let o = acg(
        dir.path(),
        &[
            "generate",
            "--params",
            p.to_str().unwrap(),
            "--n",
            "200",
            "--seed",
            "3",
            "--samples",
            "3",
            "--out-dir",
            "runs",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    for s in 0..3 {
        let d = dir.path().join(format!("runs/sample_{s:04}"));
        assert_eq!(read_json(&d.join("meta.json"))["stream"], s);
        assert!(d.join("edges.tsv").exists());
    }
    let top = read_json(&dir.path().join("runs/meta.json"));
    assert_eq!(top["samples"].as_array().unwrap().len(), 3);
}

#[test]
fn seed_falls_back_to_environment() {
    let p = params("balanced2_independent.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    acg(
        a.path(),
        &[
            "generate",
            "--params",
            p.to_str().unwrap(),
            "--n",
            "300",
            "--seed",
            "11",
        ],
    );
    let o = Command::new(env!("CARGO_BIN_EXE_acg"))
        .current_dir(b.path())
        .env("ACG_SEED", "11")
        .args(["generate", "--params", p.to_str().unwrap(), "--n", "300"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let ea = fs::read(a.path().join("edges.tsv")).unwrap();
    let eb = fs::read(b.path().join("edges.tsv")).unwrap();
    assert_eq!(ea, eb);
}

#[test]
fn random_seed_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let o = acg(
        dir.path(),
        &["generate", "--params", p.to_str().unwrap(), "--n", "100"],
    );
    assert_eq!(o.status.code(), Some(0));
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["run"]["seed"]["source"], "random");
    assert!(meta["seed"].is_u64());
    assert!(String::from_utf8_lossy(&o.stderr).contains("random seed"));
}

#[test]
fn inconsistent_params_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"K": 2, "P": [[0,0,0],[0,0,0.5],[0,0.5,0]], "Q": [[0,0,0],[0,0.5,0],[0,0,0.5]]}"#,
    )
    .unwrap();
    let o = acg(
        dir.path(),
        &[
            "generate",
            "--params",
            bad.to_str().unwrap(),
            "--n",
            "100",
            "--seed",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q+_k = k P+_k / z"));

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{").unwrap();
    let o = acg(
        dir.path(),
        &["describe", "--params", garbage.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let p = p.to_str().unwrap();
    assert_eq!(
        acg(dir.path(), &["generate", "--params", p]).status.code(),
        Some(2)
    );
    assert_eq!(acg(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let o = acg(
        dir.path(),
        &[
            "exact",
            "mean",
            "--params",
            p,
            "--margins",
            "1,2",
            "--type",
            "2,2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = acg(
        dir.path(),
        &[
            "exact",
            "mean",
            "--params",
            p,
            "--margins",
            "1,2:1,2",
            "--type",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn described_params_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_disassortative.json");
    let before = fs::read(&p).unwrap();
    let o = acg(dir.path(), &["describe", "--params", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&p).unwrap(), before);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["consistency"]["is_consistent"].as_bool().unwrap());
    let emitted = dir.path().join("emitted.json");
    fs::write(&emitted, serde_json::to_string(&v["params"]).unwrap()).unwrap();
    let o2 = acg(
        dir.path(),
        &["describe", "--params", emitted.to_str().unwrap()],
    );
    let v2: Value = serde_json::from_str(&stdout(&o2)).unwrap();
    assert_eq!(v["params"], v2["params"]);
    assert_eq!(v["lambda"], v2["lambda"]);
}

#[test]
fn asymptotics_at_q_margins_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_disassortative.json");
    let o = acg(
        dir.path(),
        &[
            "asymptotics",
            "critical-point",
            "--params",
            p.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let alpha = &v["critical_point"]["alpha"];
    for side in ["minus", "plus"] {
        for a in alpha[side].as_array().unwrap() {
            assert!(a.as_f64().unwrap().abs() < 1e-10);
        }
    }
    let o = acg(
        dir.path(),
        &[
            "asymptotics",
            "edge-mean",
            "--params",
            p.to_str().unwrap(),
            "--type",
            "2,2",
        ],
    );
    assert_eq!(stdout(&o).trim(), "0.3333333333");
}

#[test]
fn laplace_check_reports_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let o = acg(
        dir.path(),
        &[
            "asymptotics",
            "laplace-check",
            "--params",
            p.to_str().unwrap(),
            "--margins",
            "1,2:1,2",
            "--scales",
            "2,4,8",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["shrink_factors"].as_array().unwrap().len(), 1);
}

#[test]
fn configs_predict_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let cfg = dir.path().join("edge.json");
    fs::write(
        &cfg,
        r#"{"root": [2, 1], "attachments": [{"parent": 0, "orientation": "in", "type": [1, 2]}]}"#,
    )
    .unwrap();
    let o = acg(
        dir.path(),
        &[
            "configs",
            "predict",
            "--params",
            p.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_tree"], true);
    let predicted = v["expected_count_per_node"].as_f64().unwrap();
    let o = acg(
        dir.path(),
        &[
            "configs",
            "count",
            "--params",
            p.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "2000",
            "--samples",
            "5",
            "--seed",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let c: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let freq = c["frequency"].as_f64().unwrap();
    assert!(
        (freq - predicted).abs() < 0.1 * predicted,
        "{freq} vs {predicted}"
    );
}

#[test]
fn validate_writes_json_and_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let p = params("balanced2_independent.json");
    let o = acg(
        dir.path(),
        &[
            "validate",
            "--params",
            p.to_str().unwrap(),
            "--suite",
            "self-loops",
            "--sizes",
            "500",
            "--reps",
            "4",
            "--seed",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let tsv = fs::read_to_string(dir.path().join("self-loops.tsv")).unwrap();
    assert!(tsv.starts_with("n\tmean\tlambda\tdeviation"));
    assert_eq!(
        read_json(&dir.path().join("meta.json"))["options"]["reps"],
        4
    );
}
