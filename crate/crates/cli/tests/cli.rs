//! End-to-end tests driving the compiled binary: artifact emission, reject
//! accounting, exit codes, manifest reproducibility, and baseline ordering.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uatpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uatpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn synth_small(dir: &Path, seed: &str, n_aps: &str, n_stas: &str) {
    let out = uatpc(&[
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
        "synth",
        "uniform",
        "--n-aps",
        n_aps,
        "--n-stas",
        n_stas,
        "--visible",
        "0",
    ]);
    assert_ok(&out);
}

#[test]
fn synth_emits_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    synth_small(tmp.path(), "5", "4", "12");
    for name in [
        "topology.json",
        "measurements.jsonl",
        "groundtruth_pl.csv",
        "scenario_meta.json",
    ] {
        assert!(tmp.path().join(name).exists(), "{name} missing");
    }
    let lines = fs::read_to_string(tmp.path().join("measurements.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 12, "one record per station");
}

#[test]
fn ingest_accounts_for_every_reject() {
    let tmp = tempfile::tempdir().unwrap();
    synth_small(tmp.path(), "9", "3", "5");

    let mixed = tmp.path().join("mixed.jsonl");
    fs::write(
        &mixed,
        concat!(
            r#"{"ts": 1, "sta": "s1", "serving": "ap0", "pl": {"ap0": 50.0, "ap1": 60.0}}"#,
            "\n",
            "not json at all\n",
            r#"{"ts": 2, "sta": "s2", "serving": "ap9", "pl": {"ap0": 50.0}}"#,
            "\n",
            r#"{"ts": 3, "sta": "s3", "serving": "ap0", "pl": {"ap0": 50.0, "ghost": 70.0}}"#,
            "\n",
            r#"{"ts": 4, "sta": "s4", "serving": "ap1", "pl": {"ap0": 40.0, "ap1": 45.0, "ap2": 88.0}}"#,
            "\n",
        ),
    )
    .unwrap();

    let out_dir = tmp.path().join("ingested");
    let out = uatpc(&[
        "--out",
        out_dir.to_str().unwrap(),
        "ingest",
        "--measurements",
        mixed.to_str().unwrap(),
        "--topology",
        tmp.path().join("topology.json").to_str().unwrap(),
    ]);
    assert_ok(&out);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("ingest_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["accepted"], 2);
    assert_eq!(report["rejected"], 3);
    assert_eq!(report["units_total"], 5);
    let reasons: Vec<String> = report["rejects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[1].as_str().unwrap().to_string())
        .collect();
    assert!(reasons.iter().any(|r| r.contains("malformed JSON")));
    assert!(reasons.iter().any(|r| r.contains("serving not measured")));
    assert!(reasons.iter().any(|r| r.contains("unknown AP id")));

    let accepted = fs::read_to_string(out_dir.join("measurements_accepted.jsonl")).unwrap();
    assert_eq!(accepted.lines().count(), 2);
}

#[test]
fn missing_topology_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let ghost = tmp.path().join("nope/topology.json");
    let out = uatpc(&[
        "--out",
        tmp.path().join("o").to_str().unwrap(),
        "optimize",
        "--topology",
        ghost.to_str().unwrap(),
        "--matrix",
        ghost.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("nope/topology.json"),
        "stderr should name the missing path: {stderr}"
    );
}

#[test]
fn unknown_baseline_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth_small(tmp.path(), "2", "3", "6");
    let out = uatpc(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "baseline",
        "--topology",
        tmp.path().join("topology.json").to_str().unwrap(),
        "--which",
        "sorcery",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sorcery"));
}

#[test]
fn pipeline_reruns_bitwise_reproduce_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut manifests = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = uatpc(&[
            "--seed",
            "11",
            "--out",
            dir.to_str().unwrap(),
            "pipeline",
            "--n-aps",
            "5",
            "--n-stas",
            "30",
            "--visible",
            "4",
            "--epochs",
            "2",
            "--trials",
            "4",
            "--time-cap",
            "0",
        ]);
        assert_ok(&out);
        let manifest = fs::read_to_string(dir.join("manifest.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        assert!(
            parsed["artifacts"].as_array().unwrap().len() > 10,
            "pipeline should register its artifacts"
        );
        manifests.push(manifest);
    }
    assert_eq!(manifests[0], manifests[1], "same seed must reproduce every artifact hash");
}

#[test]
fn search_beats_or_ties_both_baselines() {
    let tmp = tempfile::tempdir().unwrap();
    synth_small(tmp.path(), "21", "10", "60");
    let dir = tmp.path().to_str().unwrap().to_string();
    let topology = tmp.path().join("topology.json");
    let matrix = tmp.path().join("groundtruth_pl.csv");

    let out = uatpc(&[
        "--seed",
        "21",
        "--out",
        &dir,
        "optimize",
        "--topology",
        topology.to_str().unwrap(),
        "--matrix",
        matrix.to_str().unwrap(),
        "--trials",
        "0",
        "--time-cap",
        "0",
    ]);
    assert_ok(&out);
    for which in ["fullpower", "tpcv1"] {
        let out = uatpc(&[
            "--out",
            &dir,
            "baseline",
            "--topology",
            topology.to_str().unwrap(),
            "--which",
            which,
        ]);
        assert_ok(&out);
    }

    let out = uatpc(&[
        "--out",
        &dir,
        "evaluate",
        "--topology",
        topology.to_str().unwrap(),
        "--matrix",
        matrix.to_str().unwrap(),
        "--power",
        &format!("ls={dir}/config_ls.json"),
        "--power",
        &format!("fullpower={dir}/config_fullpower.json"),
        "--power",
        &format!("tpcv1={dir}/config_tpcv1.json"),
    ]);
    assert_ok(&out);

    let table = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    let mut utilities = std::collections::HashMap::new();
    for line in table.lines().skip(1) {
        let mut fields = line.split(',');
        let name = fields.next().unwrap().to_string();
        let utility: f64 = fields.next().unwrap().parse().unwrap();
        utilities.insert(name, utility);
    }
    let ls = utilities["ls"];
    assert!(ls >= utilities["fullpower"], "search must not lose to full power");
    assert!(ls >= utilities["tpcv1"], "search must not lose to the neighbor rule");
}
