use std::path::PathBuf;
use std::process::{Command, Output};

use bwcore::modelspec::parse_model;
use bwcore::Expr;
use serde_json::Value;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.model"))
}

fn analyze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analyze")).args(args).output().unwrap()
}

fn json_report(name: &str, extra: &[&str]) -> (Value, Output) {
    let path = model(name);
    let mut args = vec![path.to_str().unwrap(), "--output", "json"];
    args.extend_from_slice(extra);
    let out = analyze(&args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (v, out)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn chain_status<'a>(v: &'a Value, status: &str) -> Vec<&'a Value> {
    v["comparison"]["chain"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == status)
        .collect()
}

#[test]
fn hypersphere_compare_has_no_differences() {
    for n in ["N=2", "N=3", "N=5"] {
        let (v, out) = json_report("hypersphere", &["--algo", "compare", "--set", n]);
        assert_eq!(out.status.code(), Some(0), "{n}: {}", stderr(&out));
        let c = &v["comparison"];
        assert_eq!(c["differences"], 0, "{n}");
        assert_eq!(c["table_differences"], Value::Array(vec![]), "{n}");
        assert_eq!(v["verdict"]["kind"], "brackets");
        assert_eq!(v["dirac"]["verdict"]["kind"], "brackets");
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    }
}

#[test]
fn toy_bw_flags_the_missing_constraint() {
    let (v, out) = json_report("toy", &["--algo", "bw"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["engine"], "bw");
    let labels: Vec<&str> = v["chain"].as_array().unwrap().iter().map(|c| c["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["Omega1"]);
    let only = chain_status(&v, "dirac-only");
    assert_eq!(only.len(), 1);
    assert_eq!(only[0]["label"], "chi2");
    assert!(chain_status(&v, "symplectic-only").is_empty());
    assert_eq!(v["comparison"]["differences"], 1);
    assert!(stderr(&out).contains("constraint chi2 = a*b*x - a*b*y - b*p_x of the Dirac chain is not generated by bw"));
}

#[test]
fn toy_mbw_with_promotion_ends_in_the_symmetry() {
    let (v, out) = json_report("toy", &["--eom-constraints"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(v["verdict"]["kind"], "symmetry");
    assert_eq!(v["eom"]["promotion"]["source"], "chi2");
    assert_eq!(v["comparison"]["differences"], 0);

    let m = parse_model(&std::fs::read_to_string(model("toy")).unwrap()).unwrap();
    let got: Vec<Expr> = v["verdict"]["generator"]["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| m.parse_expr(c.as_str().unwrap()).unwrap())
        .collect();
    let want: Vec<Expr> = ["-b", "0", "-b", "0", "-1"].iter().map(|s| m.parse_expr(s).unwrap()).collect();
    let k = want[0].try_div(&got[0]).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(&(g * &k), w);
    }
    assert_eq!(v["verdict"]["delta_v"], "0");
}

#[test]
fn relativistic_hamiltonian_and_rule() {
    let (v, out) = json_report("relativistic", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["hamiltonian"], "c*p0");
    let rules = v["rewrite_rules"]["rules"].as_array().unwrap();
    assert!(rules.iter().any(|r| r == "p0^2 -> m^2*c^2 + p1^2 + p2^2 + p3^2"));
    assert_eq!(v["rewrite_rules"]["branches"]["p0"], "+");
}

#[test]
fn free_particle_is_canonical() {
    let (v, out) = json_report("free", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["verdict"]["kind"], "brackets");
    assert_eq!(v["verdict"]["table"]["basis"], serde_json::json!(["q", "p"]));
    assert_eq!(v["verdict"]["table"]["entries"], serde_json::json!([["0", "1"], ["-1", "0"]]));
}

#[test]
fn dirac_alone_classifies_the_toy_chain() {
    let (v, out) = json_report("toy", &["--algo", "dirac"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["engine"], "dirac");
    assert_eq!(v["levels"], Value::Array(vec![]));
    let classes: Vec<&str> = v["classification"].as_array().unwrap().iter().map(|c| c["class"].as_str().unwrap()).collect();
    assert_eq!(classes, ["second-class", "second-class", "first-class"]);
}

#[test]
fn missing_model_exits_1() {
    let out = analyze(&["does-not-exist.model"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn invalid_model_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.model");
    std::fs::write(&path, "[variables]\nx : coordinate\n\n[one_form]\nx = 0\ny = 1\n").unwrap();
    let out = analyze(&[path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn level_limit_and_inconsistency_exit_2() {
    let out = analyze(&[model("toy").to_str().unwrap(), "--max-level", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inconsistent.model");
    std::fs::write(
        &path,
        "[variables]\nx : coordinate\ny : coordinate\n\n[one_form]\nx = 0\ny = 0\n\n[potential]\nx\n",
    )
    .unwrap();
    let (v, out) = {
        let out = analyze(&[path.to_str().unwrap(), "--output", "json"]);
        (serde_json::from_slice::<Value>(&out.stdout).unwrap(), out)
    };
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(v["verdict"]["kind"], "inconsistent");

    let out = analyze(&[model("toy").to_str().unwrap(), "--algo", "dirac", "--max-level", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [("toy", vec!["--eom-constraints"]), ("relativistic", vec!["--algo", "compare"])] {
        let mut runs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{name}{k}.json"));
            let mut a = vec![model(name).to_str().unwrap().to_string(), "--json".into(), path.to_str().unwrap().into()];
            a.extend(args.iter().map(|s| s.to_string()));
            let a: Vec<&str> = a.iter().map(String::as_str).collect();
            let out = analyze(&a);
            assert_eq!(out.status.code(), Some(0));
            runs.push((std::fs::read(&path).unwrap(), out.stdout));
        }
        assert_eq!(runs[0], runs[1], "{name}");
        let v: Value = serde_json::from_slice(&runs[0].0).unwrap();
        assert_eq!(v["schema_version"], 1);
    }
}

#[test]
fn both_writes_the_report_next_to_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("free.model");
    std::fs::copy(model("free"), &path).unwrap();
    let out = analyze(&[path.to_str().unwrap(), "--output", "both", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("model free (mbw)"));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("free.report.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["check"] == "jacobi" && c["seed"] == 7));
}
