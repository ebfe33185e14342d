//! End-to-end runs of the `specnet` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specnet::synthetic::FactorMarket;

fn specnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specnet")).args(args).output().expect("binary runs")
}

fn write_returns(dir: &Path, n_stocks: usize, n_days: usize) -> PathBuf {
    let path = dir.join("returns.csv");
    let market = FactorMarket { n_stocks, n_days, ..FactorMarket::default() }.generate().unwrap();
    market.panel.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("manifest_{name}.json"))).unwrap()).unwrap()
}

#[test]
fn spectra_writes_eigenvalues_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 20, 120);
    let out = dir.path().join("spec");
    let run = specnet(&["spectra", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));

    let eig = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().count(), 21);
    let m = manifest(&out, "spectra");
    assert_eq!(m["subcommand"], "spectra");
    assert_eq!(m["config"]["input"], s(&input));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["outputs"].as_array().unwrap().iter().any(|o| o["file"] == "eigenvalues.csv"));
}

#[test]
fn missing_input_is_a_validation_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let run = specnet(&["spectra", "--input", s(&missing), "--out", s(dir.path())]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains(s(&missing)));
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let run = specnet(&["pmfg", "--frobnicate"]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("Usage"));
    assert_eq!(specnet(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_list_value_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 12, 80);
    let run = specnet(&["communities", "--input", s(&input), "--out", s(dir.path()), "--detectors", "louvain,magic"]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("magic"));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 12, 80);
    let run = Command::new(env!("CARGO_BIN_EXE_specnet"))
        .args(["spectra", "--input", s(&input), "--out", s(dir.path())])
        .env("SPECNET_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn reruns_reproduce_manifest_and_deleted_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 24, 150);
    let out = dir.path().join("cp");
    let args = ["coreperiphery", "--input", s(&input), "--out", s(&out), "--samples", "300", "--seed", "5"];
    assert_eq!(specnet(&args).status.code(), Some(0));
    let first = std::fs::read(out.join("manifest_coreperiphery.json")).unwrap();
    let coreness = std::fs::read(out.join("coreness.csv")).unwrap();

    std::fs::remove_file(out.join("coreness.csv")).unwrap();
    assert_eq!(specnet(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("coreness.csv")).unwrap(), coreness);
    assert_eq!(std::fs::read(out.join("manifest_coreperiphery.json")).unwrap(), first);

    // a different seed changes the config hash
    let other = dir.path().join("cp2");
    let args2 = ["coreperiphery", "--input", s(&input), "--out", s(&other), "--samples", "300", "--seed", "6"];
    assert_eq!(specnet(&args2).status.code(), Some(0));
    let h1 = manifest(&out, "coreperiphery")["config_hash"].clone();
    let h2 = manifest(&other, "coreperiphery")["config_hash"].clone();
    assert_ne!(h1, h2);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 16, 100);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("# community run\ninput = {}\nseed = 4\ndetectors = louvain\n", s(&input))).unwrap();
    let out = dir.path().join("c");
    let run = specnet(&["--config", s(&cfg), "communities", "--out", s(&out), "--seed", "8"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let m = manifest(&out, "communities");
    assert_eq!(m["config"]["seed"], 8);
    assert_eq!(m["config"]["detectors"], "louvain");
}

#[test]
fn report_names_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let run = specnet(&["report", "--results", s(dir.path())]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("coreness.csv"));
}

#[test]
fn rolling_writes_its_four_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 15, 70);
    let out = dir.path().join("roll");
    let run = specnet(&[
        "rolling", "--input", s(&input), "--window", "60", "--step", "5", "--modes", "full,market,sector",
        "--detectors", "louvain,lpa", "--seed", "3", "--significance", "off", "--out", s(&out),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for f in ["windows.csv", "heatmap_cp.csv", "heatmap_nmi.csv", "communities.csv", "manifest_rolling.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let heat = std::fs::read_to_string(out.join("heatmap_cp.csv")).unwrap();
    assert_eq!(heat.lines().next().unwrap(), "row,0,1,2");
}

#[test]
fn full_pipeline_produces_six_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_returns(dir.path(), 30, 340);
    let res = dir.path().join("results");
    let r = s(&input);
    let o = s(&res);
    let portfolio = res.join("portfolio.csv");
    let steps: [&[&str]; 5] = [
        &["pmfg", "--input", r, "--out", o],
        &["coreperiphery", "--input", r, "--out", o, "--samples", "200"],
        &["communities", "--input", r, "--out", o],
        &["portfolio", "--returns", r, "--window", "250", "--max-hold", "40", "--step", "25", "--out", s(&portfolio)],
        &["report", "--results", o],
    ];
    for step in steps {
        let run = specnet(step);
        assert_eq!(run.status.code(), Some(0), "{step:?}: {}", String::from_utf8_lossy(&run.stderr));
    }
    for t in specnet::report::REPORT_TABLES {
        assert!(res.join(t).is_file(), "{t} missing");
    }
    let modularity = std::fs::read_to_string(res.join("table_modularity.csv")).unwrap();
    assert_eq!(modularity.lines().count(), 1 + 3 * 3);
    let frob = std::fs::read_to_string(res.join("table_frobenius.csv")).unwrap();
    let lines: Vec<&str> = frob.lines().collect();
    assert_eq!(lines[0], "mode,rossa,rombach,minres");
    assert_eq!(lines.len(), 4);
    let report = std::fs::read_to_string(&portfolio).unwrap();
    assert_eq!(report.lines().next().unwrap(), "window,strategy,weighting,holding_period,sharpe");
    // 3 windows (starts 0, 25, 50) x 7 strategies x 2 weightings x 40 holding periods
    assert_eq!(report.lines().count(), 1 + 3 * 7 * 2 * 40);
}
