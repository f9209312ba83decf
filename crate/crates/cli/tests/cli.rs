use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qstat_cli::data::load_csv;
use serde_json::Value;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/quality_triple.csv")
}

fn qstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstat")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn anova_on_fixture() {
    let f = fixture();
    let v = json(&qstat(&["anova", f.to_str().unwrap()]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["df"], serde_json::json!([2.0, 75.0]));
    let stat = v["statistic"].as_f64().unwrap();
    assert!((stat - 9.1763).abs() < 1e-3, "{stat}");
    assert!(v["p_value"].as_f64().unwrap() < 1e-3);
    assert!(v.get("seed").is_some());
}

#[test]
fn ttest_pooled_two_conditions() {
    let f = fixture();
    let v = json(&qstat(&["ttest", f.to_str().unwrap(), "--conditions", "g1,g2"]));
    assert_eq!(v["df"], 50.0);
    assert!((v["statistic"].as_f64().unwrap() + 3.6378).abs() < 1e-3);
    assert_eq!(v["method"], "t_pooled");
}

#[test]
fn describe_reports_pdu_only_when_asked() {
    let f = fixture();
    let v = json(&qstat(&["describe", f.to_str().unwrap()]));
    assert_eq!(v["conditions"].as_array().unwrap().len(), 3);
    assert!(v["conditions"][0].get("pdu").is_none());
    let v = json(&qstat(&["describe", f.to_str().unwrap(), "--pdu-threshold", "5"]));
    assert!((v["conditions"][0]["pdu"].as_f64().unwrap() - 8.0 / 26.0).abs() < 1e-12);
}

#[test]
fn check_variance_and_workflow() {
    let f = fixture();
    let v = json(&qstat(&["check-variance", f.to_str().unwrap()]));
    assert!((v["ratio"].as_f64().unwrap() - 0.749).abs() < 1e-3);
    assert_eq!(v["heterogeneous"], false);
    let v = json(&qstat(&["workflow", f.to_str().unwrap(), "--iters", "1000"]));
    assert_eq!(v["report"]["chosen_method"], "anova_oneway");
    assert_eq!(v["report"]["warnings"].as_array().unwrap().len(), 0);
    let v = json(&qstat(&["workflow", f.to_str().unwrap(), "--iters", "1000", "--mean-not-adequate"]));
    assert_eq!(v["report"]["chosen_method"], "permutation");
}

#[test]
fn permute_writes_histogram_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let hist = dir.path().join("h.csv");
    let args = ["permute", f.to_str().unwrap(), "--iters", "5000", "--seed", "9", "--bins", "20"];
    let mut with_hist = args.to_vec();
    with_hist.extend(["--hist", hist.to_str().unwrap()]);
    let a = qstat(&with_hist);
    let b = qstat(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["statistic_kind"], "f_anova");
    let csv = std::fs::read_to_string(&hist).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_left,bin_right,density"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn sim_clt_contract() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("clt.csv");
    let out = dir.path().join("clt.json");
    let status = qstat(&[
        "sim", "clt", "--dist", "beta", "--k", "5", "--n", "25", "--iters", "100000", "--seed", "7",
        "--hist", hist.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["ks_distance"].as_f64().unwrap() < 0.02);
    assert_eq!(v["seed"], 7);
    assert_eq!(std::fs::read_to_string(&hist).unwrap().lines().count(), 101);
}

#[test]
fn sim_treatment_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let v = json(&qstat(&[
        "sim", "treatment", "--effects", "0,-1.2,-3.1", "--mode", "heterogeneous", "--hetero-sigma",
        "0.7", "--subjects", "30", "--seed", "12", "--csv", csv.to_str().unwrap(),
    ]));
    let loaded = load_csv(&csv).unwrap().groups();
    let cfg = qstat::sim::TreatmentConfig {
        mu_org: 4.0,
        effects: vec![0.0, -1.2, -3.1],
        noise_sigma: 0.5,
        mode: qstat::sim::TreatmentMode::Heterogeneous,
        hetero_sigma: 0.7,
        n_subjects: 30,
        seed: qstat::RngSeed::new(12),
    };
    assert_eq!(loaded, qstat::sim::generate_treatment_groups(&cfg).unwrap());
    assert_eq!(v["conditions"].as_array().unwrap().len(), 3);
}

#[test]
fn sim_two_step_small() {
    let v = json(&qstat(&["sim", "two-step", "--dist", "uniform", "--n", "10", "--iters", "200", "--seed", "3"]));
    for key in ["rate_direct", "rate_two_step", "rate_normality_reject"] {
        let r = v[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&r), "{key} = {r}");
    }
}

#[test]
fn exit_codes() {
    let f = fixture();
    let f = f.to_str().unwrap();
    let unknown = qstat(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(qstat(&["sim", "clt", "--dist", "beta"]).status.code(), Some(2));
    assert_eq!(qstat(&["ttest", f]).status.code(), Some(2));
    assert_eq!(qstat(&["ttest", f, "--conditions", "g1,g2,g3"]).status.code(), Some(2));
    assert_eq!(qstat(&["permute", f, "--statistic", "t", "--seed", "1"]).status.code(), Some(2));
    let bad = qstat(&["ttest", f, "--conditions", "g1,nope"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
    assert_eq!(qstat(&["anova", "/definitely/missing.csv"]).status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "subject,condition,score\ns1,a,1\ns2,a,oops\n").unwrap();
    let out = qstat(&["describe", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.contains("oops"), "{msg}");
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qstat"))
            .env("QSTAT_THREADS", threads)
            .args(["sim", "clt", "--dist", "uniform", "--iters", "3000", "--seed", "5"])
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("3").stdout);
    assert_eq!(run("0").status.code(), Some(2));
}
