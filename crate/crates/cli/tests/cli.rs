use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use vega_cli::{cmd_km2, cmd_monodromy, cmd_trig, parse_frequency, MonodromyParams, ProblemFile, Report, ReportStatus, RunOptions};

fn fixture(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn vega(args: &[&str]) -> (Option<i32>, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_vega")).args(args).output().expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), report)
}

fn load(name: &str) -> (ProblemFile, vega_core::HomogeneousPotential, RunOptions) {
    let (p, v) = ProblemFile::parse(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
    let o = RunOptions::from_problem(&p.options);
    (p, v, o)
}

#[test]
fn exit_codes_follow_verdicts() {
    assert_eq!(vega(&["analyze", &fixture("oscillator.json")]).0, Some(0));
    assert_eq!(vega(&["analyze", &fixture("cubic.json")]).0, Some(2));
    assert_eq!(vega(&["km2", &fixture("radial_km2.json")]).0, Some(0));
    assert_eq!(vega(&["analyze", &fixture("radial_km2.json")]).0, Some(1));
    assert_eq!(vega(&["analyze", &fixture("superposition.json"), "--order", "3"]).0, Some(2));
}

#[test]
fn oscillator_without_assertion_is_inconclusive() {
    let text = std::fs::read_to_string(fixture("oscillator.json")).unwrap().replace("\"assert_independence\": true", "\"assert_independence\": false");
    let (p, v) = ProblemFile::parse(&text).unwrap();
    let r = vega_cli::cmd_analyze(&p, &v, &RunOptions::from_problem(&p.options));
    assert_eq!(r.status, ReportStatus::Inconclusive);
    assert!(r.results["candidates"][0]["note"].as_str().unwrap().contains("independence"));
}

#[test]
fn malformed_exponent_vector_is_located() {
    let (code, r) = vega(&["analyze", &fixture("malformed.json")]);
    assert_eq!(code, Some(1));
    assert_eq!(r["status"], "Error");
    assert_eq!(r["results"]["parse_error"]["path"], "potential.numerator[1].exponents");
}

#[test]
fn syntax_error_has_line_and_column() {
    let err = ProblemFile::parse("{\"n\": 2,\n \"k\": 2,\n \"potential\": {\"numerator\": [{\"exponents\": [2, \"x\"]}]}}").unwrap_err();
    assert_eq!(err.line, Some(3));
    assert!(err.path.starts_with("potential.numerator[0].exponents"), "{}", err.path);
}

#[test]
fn trig_examples() {
    let r = cmd_trig(2, &parse_frequency("0").unwrap());
    assert_eq!(r.status, ReportStatus::Ok);
    assert_eq!(r.results["note"], "T_2^(0) = -cot t");
    let r = cmd_trig(1, &parse_frequency("5").unwrap());
    assert_eq!(r.status, ReportStatus::Obstruction);
    assert_eq!(r.results["verdict"]["meromorphic"], false);
    let r = cmd_trig(6, &parse_frequency("4").unwrap());
    assert_eq!(r.results["verdict"]["meromorphic"], true);
    assert_eq!(r.results["reduction"]["p"], serde_json::json!(["0", "1"]));
    let r = cmd_trig(3, &parse_frequency("sqrt(2)").unwrap());
    assert_eq!(r.status, ReportStatus::Obstruction);
    let (code, out) = vega(&["trig", "--n", "4", "--omega", "-2"]);
    assert_eq!(code, Some(0), "{out}");
}

#[test]
fn km2_order_one_is_the_homogeneous_basis() {
    let (p, v, mut o) = load("radial_km2.json");
    o.p_max = 1;
    let r = cmd_km2(&p, &v, &o);
    assert_eq!(r.status, ReportStatus::Ok);
    let c = &r.results["candidates"][0];
    assert_eq!(c["solution"]["orders"].as_array().unwrap().len(), 1);
    assert_eq!(c["homogeneous_basis"].as_array().unwrap().len(), 2);
}

#[test]
fn km2_energy_flag_switches_regime() {
    let (code, r) = vega(&["km2", &fixture("jordan_km2.json"), "--energy", "1/2"]);
    assert_eq!(code, Some(0));
    assert_eq!(r["results"]["regime"], serde_json::json!({"NonzeroEnergy": ["1", "2"]}));
    assert_eq!(r["provenance"]["options"]["energy"], serde_json::json!(["1", "2"]));
}

#[test]
fn monodromy_separates_obstructed_and_free() {
    let params = MonodromyParams { steps: 256, ..MonodromyParams::default() };
    let (p, v, o) = load("oscillator.json");
    let r = cmd_monodromy(&p, &v, &o, &params);
    assert_eq!(r.status, ReportStatus::Ok);
    assert!(r.results["candidates"][0]["identity_defect"].as_f64().unwrap() < 1e-8);
    let (p, v, o) = load("cubic.json");
    let r = cmd_monodromy(&p, &v, &o, &params);
    let c = &r.results["candidates"][0];
    assert!(c["identity_defect"].as_f64().unwrap() > 1e-3);
    for j in c["integral_jumps"].as_array().unwrap() {
        let (n, e) = (&j["numeric"], &j["exact"]);
        assert!((n["im"].as_f64().unwrap() - e["im"].as_f64().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn text_report() {
    let out = Command::new(env!("CARGO_BIN_EXE_vega")).args(["--report", "text", "trig", "--n", "1", "--omega", "5"]).output().unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("vega "));
    assert!(s.contains("status: Obstruction"));
}

proptest! {
    #[test]
    fn trig_reports_round_trip(n in 1u32..9, num in -9i64..10, den in 1i64..4) {
        let w = parse_frequency(&format!("{num}/{den}")).unwrap();
        let r = cmd_trig(n, &w);
        let text = r.to_canonical_json();
        let back = Report::from_json(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.to_canonical_json(), text);
    }
}
