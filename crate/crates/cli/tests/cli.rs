use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nadyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nadyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nadyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn period2_on_cubic_pole() {
    let out = nadyn(&["check", "--theorem", "period2", "z^3 + z*t^-1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["payload"]["verdict"], "verified");
    assert_eq!(r["payload"]["witness"]["kind"], "cycle");
    assert_eq!(r["payload"]["witness"]["value"]["exact_period"], 1);
}

#[test]
fn analyze_good_reduction() {
    let out = nadyn(&["analyze", "z^2 + t"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["payload"]["good_reduction"], true);
    assert!(r["payload"]["blow_up"].is_null());
    assert_eq!(r["payload"]["potential_good_reduction"]["kind"], "pgr");
}

#[test]
fn analyze_pole_reports_not_pgr() {
    let r = report(&nadyn(&["analyze", "quadratic-pole"]));
    assert_eq!(r["family"], "(1)*z^2 + (1*t^-1)");
    assert_eq!(r["payload"]["potential_good_reduction"]["kind"], "not-pgr");
    assert_eq!(r["payload"]["blow_up"]["period"], 1);
    assert_eq!(r["payload"]["blow_up"]["multiplier_valuation"], "-1/2");
}

#[test]
fn inconclusive_exit_code() {
    let out = nadyn(&["analyze", "--periods", "2", "mcmullen"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "inconclusive");
}

#[test]
fn scan_writes_csv_and_fits_half() {
    let csv = scratch("scan.csv");
    let out = nadyn(&[
        "scan",
        "--n",
        "2",
        "--radii",
        "1e-2:1e-6",
        "--csv",
        csv.to_str().unwrap(),
        "z^2 + t^-1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let slope = r["payload"]["mean_blow_up_slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.05, "{slope}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t_re,t_im,period,cycle_id,root_modulus\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn spectrum_and_periodic() {
    let r = report(&nadyn(&["spectrum", "--n", "1", "z^2 + t^-1"]));
    assert_eq!(r["payload"]["multipliers"].as_array().unwrap().len(), 3);
    let r = report(&nadyn(&["periodic", "--n", "2", "z^2 + t^-1"]));
    assert_eq!(r["payload"]["points_with_multiplicity"], 5);
    assert_eq!(r["payload"]["formal_cycles"], 1);
}

#[test]
fn theorem_checks() {
    let r = report(&nadyn(&["check", "--theorem", "milnor", "z^2 + t^-1"]));
    assert_eq!(r["payload"]["relation_holds"], true);
    assert_eq!(r["payload"]["degenerate"], true);
    let r = report(&nadyn(&["check", "--theorem", "main5", "--n", "2", "z^2 + t^-1"]));
    assert!(r["payload"]["fraction"].as_f64().unwrap() >= 0.75);
    let r = report(&nadyn(&["check", "--theorem", "main2", "cubic-rational-pole"]));
    assert_eq!(r["payload"]["verdict"], "verified");
    let r = report(&nadyn(&["check", "--theorem", "dichotomy", "--n", "2", "z^2 + t"]));
    assert_eq!(r["payload"]["verdict"], "verified");
    let out = nadyn(&["check", "--theorem", "period3", "z^2 + t"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["code"], "E_PRECONDITION");
}

#[test]
fn consistency_and_no_match() {
    let r = report(&nadyn(&["consistency", "--n", "1", "--t0", "1e-6", "z^2 + t^-1"]));
    assert_eq!(r["payload"]["matched"], 3);
    let out = nadyn(&["consistency", "--precision", "1", "--n", "1", "--t0", "0.3", "z^2 + 20*t"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["error"]["code"], "E_NO_MATCH");
}

#[test]
fn parse_errors_and_degree_mismatch() {
    let out = nadyn(&["periodic", "--n", "1", "z^2 +\n t^"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["error"]["code"], "E_SYNTAX");
    assert!(r["error"]["message"].as_str().unwrap().contains("line 2"));
    let out = nadyn(&["periodic", "--n", "1", "--degree", "3", "z^2 + t/z^2"]);
    assert_eq!(report(&out)["error"]["code"], "E_DEGREE_MISMATCH");
    let out = nadyn(&["periodic", "--n", "1", "--degree", "4", "z^2 + t/z^2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let args = ["scan", "--n", "1", "--radii", "1e-2:1e-4", "z^3 + z*t^-1"];
    let a = nadyn(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_nadyn"))
        .args(args)
        .env("NADYN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("report.json");
    let out = nadyn(&["analyze", "--out", path.to_str().unwrap(), "z^2 + t"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["command"], "analyze");
}
