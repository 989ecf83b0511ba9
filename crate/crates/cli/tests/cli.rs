mod common;

use blowup_cli::{run, RunConfig, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use common::*;

#[test]
fn lv_hopf_reports_one_half() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["lv-hopf", "--system", &data("lv_arctan.cfg")]), EXIT_OK);
    let s = summary(dir.path(), "lv-hopf");
    assert_eq!(s["status"], "ok");
    assert!((f(&s["result"]["lambda_h"]) - 0.5).abs() < 1e-10);
    assert_eq!(s["result"]["equilibrium"]["stability"], "neutral");
}

#[test]
fn catalog_entries_are_selected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cat = data("lv_catalog.cfg");
    assert_eq!(run_in(dir.path(), &["lv-hopf", "--system", &cat]), EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["lv-hopf", "--system", &cat, "--entry", "cubic"]), EXIT_OK);
    let s = summary(dir.path(), "lv-hopf");
    assert!((f(&s["result"]["lambda_h"]) - 2.0 / 3.0).abs() < 1e-10);
}

#[test]
fn hb_root_reports_unit_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(dir.path(), &["hb-root", "--symbol", &data("quad.cfg"), "--seed", "1.2,0.3"]);
    assert_eq!(code, EXIT_OK);
    let r = &summary(dir.path(), "hb-root")["result"];
    assert!((f(&r["w0"]) - 1.0).abs() < 1e-12);
    assert!(f(&r["lambda0"]).abs() < 1e-12);
}

#[test]
fn lv_branch_writes_csv_with_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lv-branch", "--system", &data("lv_arctan.cfg"), "--from", "0.49", "--to", "0.01", "--cap", "50"];
    assert_eq!(run_in(dir.path(), &args), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("lv-branch.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,amplitude,period,anchor_u,anchor_v"));
    assert!(csv.trim_end().ends_with("# verdict: BlewUp(lambda=1.099999999999997e-1)") || csv.contains("# verdict: BlewUp("));
    let s = summary(dir.path(), "lv-branch");
    assert_eq!(s["result"]["verdict"]["kind"], "blew_up");
    assert_eq!(s["artifacts"], serde_json::json!(["lv-branch.csv"]));
}

#[test]
fn seed_failure_is_a_domain_error_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lv-branch", "--system", &data("lv_arctan.cfg"), "--from", "0.6", "--to", "0.9"];
    assert_eq!(run_in(dir.path(), &args), EXIT_DOMAIN);
    let s = summary(dir.path(), "lv-branch");
    assert_eq!(s["status"], "domain_error");
    assert!(s["error"].as_str().unwrap().contains("λ_H = 0.5"));
    assert!(dir.path().join("lv-branch.timings.json").exists());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["frobnicate"]), EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["lv-hopf", "--system", "/no/such/file.cfg"]), EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["hb-branch", "--symbol", &data("quad.cfg"), "--grid", "10"]), EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["hb-root", "--symbol", &data("lv_arctan.cfg")]), EXIT_USAGE);
    assert_eq!(run_in(dir.path(), &["lv-hopf", "--bogus-flag"]), EXIT_USAGE);
    assert_eq!(run(&["blowup", "--version"]), EXIT_OK);
}

#[test]
fn summary_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let sym = data("quad.cfg");
    let arg_sets: Vec<Vec<&str>> = vec![
        vec!["hb-check", "--symbol", &sym, "--box", "0.5,1.5,-0.6,0.6"],
        vec!["hb-validate", "--symbol", &sym, "--r", "0.5", "--harmonics", "16", "--grid", "64"],
    ];
    for args in arg_sets {
        assert_eq!(run_in(dir.path(), &args), EXIT_OK);
        let s = summary(dir.path(), args[0]);
        let cfg: RunConfig = serde_json::from_value(s["config"].clone()).unwrap();
        let mut argv = vec!["blowup"];
        argv.extend(&args);
        let out = dir.path().display().to_string();
        argv.extend(["--out", out.as_str()]);
        let reparsed = <RunConfig as clap::Parser>::try_parse_from(argv).unwrap();
        assert_eq!(cfg, reparsed);
    }
}

#[test]
fn hb_check_passes_on_a_wide_box() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["hb-check", "--symbol", &data("quad.cfg"), "--box", "0.5,1.5,-0.6,0.6", "--harmonics", "16"];
    assert_eq!(run_in(dir.path(), &args), EXIT_OK);
    let r = &summary(dir.path(), "hb-check")["result"];
    assert_eq!(r["all_pass"], true);
    assert!(f(&r["report"]["boundary_margin"]) > 0.0);
    assert!(f(&r["report"]["min_det_j"]) > 0.0);
    assert!(f(&r["report"]["min_resonance"]) > 0.0);
}

#[test]
fn simulation_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "lv-simulate", "--system", &data("lv_catalog.cfg"), "--entry", "quad", "--lambda", "0.4", "--x0", "1", "--y0", "0.5",
        "--t-end", "20", "--svg",
    ];
    assert_eq!(run_in(dir.path(), &args), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("lv-simulate.csv")).unwrap();
    assert!(csv.starts_with("t,x,y\n0.000000000000000e0,1.000000000000000e0,5.000000000000000e-1\n"));
    let svg = std::fs::read_to_string(dir.path().join("lv-simulate.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn arctan_branch_chart_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lv-branch", "--system", &data("lv_arctan.cfg"), "--from", "0.49", "--to", "0.01", "--cap", "50", "--svg"];
    assert_eq!(run_in(dir.path(), &args), EXIT_OK);
    let svg = std::fs::read_to_string(dir.path().join("lv-branch.svg")).unwrap();
    let golden = include_str!("golden/lv_arctan_branch.svg");
    assert_eq!(svg, golden);

    // λ decreases along the branch while the amplitude grows: x and y screen
    // coordinates both fall monotonically.
    let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    let xy: Vec<(f64, f64)> = points
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert!(xy.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1));
}
