use std::process::{Command, Output};

use serde_json::Value;

fn fdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdiv")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

/// Rebuilds the command line from a report's echoed parameters.
fn replay_args(report: &Value) -> Vec<String> {
    let mut args = vec![report["command"].as_str().unwrap().to_string()];
    for (key, value) in report["params"].as_object().unwrap() {
        let text = match value {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_u64() => n.to_string(),
            Value::Number(n) => format!("{:?}", n.as_f64().unwrap()),
            Value::Array(items) => items
                .iter()
                .map(|v| format!("{:?}", v.as_f64().unwrap()))
                .collect::<Vec<_>>()
                .join(","),
            other => panic!("unexpected parameter {other}"),
        };
        args.push(format!("--{key}={text}"));
    }
    args
}

fn assert_round_trip(args: &[&str]) {
    let first = fdiv(args);
    let report = json(&first);
    let replay = replay_args(&report);
    let again = fdiv(&replay.iter().map(String::as_str).collect::<Vec<_>>());
    let second = json(&again);
    assert_eq!(
        report["value"].as_f64().unwrap().to_bits(),
        second["value"].as_f64().unwrap().to_bits(),
        "{args:?} vs {replay:?}"
    );
    assert_eq!(String::from_utf8_lossy(&first.stdout), String::from_utf8_lossy(&again.stdout), "{args:?} vs {replay:?}");
}

#[test]
fn reports_replay_bit_for_bit() {
    assert_round_trip(&["chi2", "--l1", "1", "--l2", "2"]);
    assert_round_trip(&["chi2", "--family", "gaussian", "--mu1", "0.1,-0.3", "--mu2", "1,1", "--side", "neyman"]);
    assert_round_trip(&["chik", "--l1", "0.6", "--l2", "0.3", "--k", "7", "--lambda", "0.9"]);
    assert_round_trip(&["kl", "--l1", "0.6", "--l2", "0.3", "--method", "series", "--s", "15"]);
    assert_round_trip(&["kl", "--l1", "0.6", "--l2", "0.3", "--method", "mc", "--n", "20000", "--seed", "9"]);
    assert_round_trip(&["fdiv", "--l1", "5", "--l2", "5.1", "--generator", "alpha", "--alpha", "0.3", "--method", "taylor", "--s", "6", "--ratio-min", "0.5", "--ratio-max", "2"]);
    assert_round_trip(&["fdiv", "--l1", "5", "--l2", "5.1", "--generator", "js", "--method", "taylor-auto"]);
    assert_round_trip(&["fdiv", "--l1", "5", "--l2", "5.1", "--generator", "vajda", "--vajda-k", "3", "--method", "second-order"]);
    assert_round_trip(&["mc", "--family", "gaussian", "--mu1", "0,0,0", "--mu2", "0.2,0.1,-0.1", "--generator", "hellinger", "--n", "30000", "--seed", "4"]);
    assert_round_trip(&["oracle", "--l1", "2", "--l2", "3", "--generator", "tv"]);
    assert_round_trip(&["oracle", "--family", "gaussian", "--mu1", "0,0,0,0", "--mu2", "1,0,0,0", "--generator", "kl", "--n", "5000"]);
}

#[test]
fn chi2_reports_published_value() {
    let r = json(&fdiv(&["chi2", "--family", "poisson", "--l1", "1", "--l2", "2", "--side", "pearson"]));
    let v = r["value"].as_f64().unwrap();
    assert!(((v - (std::f64::consts::E - 1.0)) / v).abs() <= 1e-12);
    assert_eq!(r["method"], "closed_form");
    assert_eq!(r["family"], "poisson");
    assert_eq!(r["log_exponent"].as_f64(), Some(1.0));
}

#[test]
fn kl_reports_published_value() {
    let r = json(&fdiv(&["kl", "--family", "poisson", "--l1", "0.6", "--l2", "0.3", "--method", "bregman"]));
    assert!((r["value"].as_f64().unwrap() - 0.1158).abs() <= 1e-4);
    assert_eq!(r["method"], "bregman");
}

#[test]
fn series_report_shape() {
    let r = json(&fdiv(&["fdiv", "--l1", "0.6", "--l2", "0.3", "--generator", "kl", "--s", "4"]));
    let trace = r["trace"].as_array().unwrap();
    let terms = r["terms"].as_array().unwrap();
    assert_eq!(trace.len(), 5);
    assert_eq!(terms.len(), 5);
    assert_eq!(r["truncation_order"], 4);
    assert_eq!(trace[4].as_f64(), r["value"].as_f64());
    for field in ["std_error", "seed", "n", "bound"] {
        assert!(r.get(field).is_none(), "{field}");
    }
    let mc = json(&fdiv(&["mc", "--l1", "0.6", "--l2", "0.3", "--generator", "kl", "--n", "1000", "--seed", "3"]));
    assert_eq!(mc["seed"], 3);
    assert_eq!(mc["n"], 2000);
    assert!(mc["std_error"].as_f64().unwrap() > 0.0);
    assert_eq!(mc["method"], "monte_carlo");
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("an error line");
    serde_json::from_str(last).expect("error line is JSON")
}

#[test]
fn exit_codes() {
    let cases: [(&[&str], i32); 9] = [
        (&["chi2", "--l1", "1"], 2),
        (&["chi2", "--l1", "-1", "--l2", "2"], 2),
        (&["chi2", "--frobnicate"], 2),
        (&["chi2", "--family", "gaussian", "--mu1", "0,0", "--mu2", "1"], 2),
        (&["chik", "--l1", "1", "--l2", "2", "--k", "31"], 2),
        (&["fdiv", "--l1", "1", "--l2", "2", "--generator", "nope"], 2),
        (&["fdiv", "--l1", "1", "--l2", "2", "--generator", "kl", "--center", "0"], 3),
        (&["fdiv", "--l1", "1", "--l2", "3", "--generator", "kl", "--method", "taylor-auto"], 4),
        (&["fdiv", "--l1", "1", "--l2", "2", "--generator", "tv", "--method", "taylor"], 2),
    ];
    for (args, code) in cases {
        let out = fdiv(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let line = error_line(&out);
        assert_eq!(line["exit_code"], code);
        assert!(line["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn non_convergence_still_reports_partial_sums() {
    let out = fdiv(&["fdiv", "--l1", "1", "--l2", "3", "--generator", "kl", "--method", "taylor-auto"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "diverging");
    assert!(r["trace"].as_array().is_some());
}

#[test]
fn help_and_version_succeed() {
    assert!(fdiv(&["--help"]).status.success());
    assert!(fdiv(&["--version"]).status.success());
    assert!(fdiv(&["fdiv", "--help"]).status.success());
}

#[test]
fn csv_plain_and_output_file() {
    let csv = fdiv(&["chi2", "--l1", "1", "--l2", "2", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("value,1.7182818284590451e0"));
    let plain = fdiv(&["chi2", "--l1", "1", "--l2", "2", "--format", "plain"]);
    assert!(String::from_utf8(plain.stdout).unwrap().contains("1.7182818284590451e0"));

    let path = std::env::temp_dir().join(format!("fdiv-cli-test-{}.json", std::process::id()));
    let out = fdiv(&["chi2", "--l1", "1", "--l2", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["command"], "chi2");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn high_dimensional_oracle_falls_back() {
    let r = json(&fdiv(&["oracle", "--family", "gaussian", "--mu1", "0,0,0,0", "--mu2", "0.1,0,0,0", "--generator", "kl", "--n", "20000"]));
    assert_eq!(r["method"], "monte_carlo");
    assert!(r["diagnostic"].as_str().unwrap().contains("fell back"));
    let v = r["value"].as_f64().unwrap();
    assert!((v - 0.005).abs() <= 5.0 * r["std_error"].as_f64().unwrap());
}
