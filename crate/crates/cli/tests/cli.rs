use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shaping4d"))
        .args(args)
        .env_remove("SHAPING4D_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn analyze_table1() {
    let r = json(&run(&["analyze", "table1"]));
    assert!((r["msed"].as_f64().unwrap() - 0.69).abs() < 0.005);
    assert_eq!(r["msed_pairs"], 32);
    assert_eq!(r["gray"], true);
    assert_eq!(r["constant_modulus"], true);
    assert_eq!(r["projections"]["x"]["distinct_points"], 12);
    assert_eq!(r["projections"]["y"]["distinct_points"], 12);
    let pairs: u64 = r["spectrum"].as_array().unwrap().iter().map(|e| e["count"].as_u64().unwrap()).sum();
    assert_eq!(pairs, 64 * 63 / 2);
}

#[test]
fn analyze_pm8psk_moments() {
    let r = json(&run(&["analyze", "pm8psk"]));
    assert!((r["mu4"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["mu6"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn analyze_spectrum_as_csv() {
    let out = stdout(&run(&["analyze", "table1", "--format", "csv"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("d2,count,hd1_count"));
    assert!(lines.next().unwrap().ends_with(",32,32"));
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.json");
    std::fs::write(
        &dup,
        r#"{"m": 1, "points": [[1, 0, 0, 0], [-1, 0, 0, 0]], "labels": [0, 0]}"#,
    )
    .unwrap();
    let o = run(&["analyze", dup.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(run(&["analyze", "nosuchformat"]).status.code(), Some(3));
    assert_eq!(run(&["optimize", "--init", "missing.json"]).status.code(), Some(3));
    assert_eq!(run(&["prs", "gen", "--r", "0.5", "--theta", "50"]).status.code(), Some(3));
}

#[test]
fn argument_errors_exit_with_code_2() {
    assert_eq!(run(&["air", "table1", "--snr", "10:0:1"]).status.code(), Some(2));
    assert_eq!(run(&["air", "table1", "--snr", "0:1:0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn air_csv_is_reproducible() {
    let args = ["air", "table1", "--snr", "7:8:0.5", "--samples", "2e4", "--seed", "7"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    let mut rdr = csv::Reader::from_reader(a.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["snr_db", "mi", "mi_stderr", "gmi", "gmi_stderr", "samples", "seed"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let gmi: f64 = rows[2][3].parse().unwrap();
    assert!((gmi - 5.0).abs() < 0.1, "{gmi}");
    assert_eq!(&rows[0][6], "7");
}

#[test]
fn air_thread_count_does_not_change_output() {
    let args = ["air", "pm8qam", "--snr", "8", "--samples", "2e4"];
    let base = stdout(&run(&args));
    for t in ["1", "3"] {
        let o = Command::new(env!("CARGO_BIN_EXE_shaping4d"))
            .args(args)
            .env("SHAPING4D_THREADS", t)
            .output()
            .unwrap();
        assert_eq!(stdout(&o), base);
    }
}

#[test]
fn prs_gen_roundtrips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prs.json");
    let o = run(&["prs", "gen", "--r", "0.54", "--theta", "25.5", "--es", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let r = json(&run(&["analyze", path.to_str().unwrap()]));
    let p = &r["prs_params"];
    assert!((p["r"].as_f64().unwrap() - 0.54).abs() < 1e-9);
    assert!((p["theta_deg"].as_f64().unwrap() - 25.5).abs() < 1e-9);
    assert!((p["es"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(r["metadata"]["r"], 0.54);
}

#[test]
fn prs_sweep_marks_invalid_cells_and_reports_the_optimum() {
    let o = run(&[
        "prs", "sweep", "--snr", "8", "--r", "0.5:0.6:0.05", "--theta", "40:45:5", "--samples", "1e4",
    ]);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "r,theta_deg,gmi");
    assert_eq!(rows.len(), 1 + 3 * 2);
    assert!(rows.iter().any(|l| l.ends_with(",45.0,")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("optimum"));
}

#[test]
fn optimize_is_deterministic_and_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let args = [
        "optimize",
        "--init",
        "pm8qam",
        "--symmetry",
        "orthant",
        "--poa-iters",
        "2",
        "--outer-iters",
        "1",
        "--surrogate-samples",
        "2000",
        "--poa-budget",
        "20",
        "--samples",
        "1e4",
        "--trace",
        trace.to_str().unwrap(),
    ];
    let a = stdout(&run(&args));
    let t = std::fs::read_to_string(&trace).unwrap();
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert_eq!(std::fs::read_to_string(&trace).unwrap(), t);
    for line in t.lines() {
        let rec: Value = serde_json::from_str(line).unwrap();
        assert!(rec["objective_after"].as_f64() > rec["objective_before"].as_f64());
        assert!(rec["kind"] == "poa" || rec["kind"] == "bsa");
    }
    let c: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(c["points"].as_array().unwrap().len(), 64);
    assert!(c["metadata"]["gmi"].as_f64().is_some());
}

#[test]
fn link_power_reports_gap_at_optimum() {
    let o = run(&["link", "power", "--power", "-3:1:0.5", "--formats", "table1,pm8qam"]);
    let out = stdout(&o);
    assert!(out.starts_with("format,launch_power_dbm,sigma2_ase,sigma2_nli,snr_eff_db\n"));
    assert_eq!(out.lines().count(), 1 + 2 * 9);
    let err = String::from_utf8_lossy(&o.stderr);
    let gap: f64 = err
        .lines()
        .find(|l| l.starts_with("pm8qam"))
        .and_then(|l| l.rsplit("= ").next())
        .and_then(|v| v.trim_end_matches(" dB").parse().ok())
        .unwrap();
    assert!((gap - 0.16).abs() < 0.05, "{err}");
}

#[test]
fn link_with_vanishing_nli_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("link.json");
    let shipped = stdout(&run(&["link", "config"]));
    let mut v: Value = serde_json::from_str(&shipped).unwrap();
    v["eta"] = serde_json::json!([0.0, 0.0, 0.0, 0.0]);
    std::fs::write(&cfg, v.to_string()).unwrap();
    let o = run(&["link", "power", "--power", "0", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn link_distance_rejects_partial_spans() {
    let o = run(&["link", "distance", "--distance", "1000:1100:100", "--samples", "1e4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn link_distance_reach() {
    let o = run(&[
        "link",
        "distance",
        "--distance",
        "4800:7200:800",
        "--reach-at",
        "5.2",
        "--samples",
        "5e4",
    ]);
    let out = stdout(&o);
    assert!(out.starts_with("format,distance_km,p_opt_dbm,snr_eff_db,gmi\n"));
    let err = String::from_utf8_lossy(&o.stderr);
    let delta: f64 = err
        .lines()
        .find(|l| l.starts_with("pm8qam"))
        .and_then(|l| l.rsplit("= ").next())
        .and_then(|v| v.trim_end_matches(" km").parse().ok())
        .unwrap();
    assert!((delta + 1100.0).abs() < 165.0, "{err}");
}
