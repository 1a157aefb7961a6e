use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use circlat::bayes::{changepoint_stream, ChangepointModel, McmcConfig};
use circlat::distributions::pmf_cdwc;
use circlat::sampling::sample_pmf;
use circlat::{Lattice, Pmf, RngSeed};
use serde_json::Value;
use tempfile::TempDir;

fn circlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlat")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = circlat(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_of(out: &Output) -> Value {
    let e: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    e["error"].clone()
}

fn write_seq(dir: &Path, name: &str, data: &[usize]) -> String {
    let p = dir.join(name);
    fs::write(&p, data.iter().map(|x| format!("{x}\n")).collect::<String>()).unwrap();
    p.to_str().unwrap().to_string()
}

const SHORT_MCMC: &str = "iterations = 3000\nburnin = 1000\nthin = 2\n";

#[test]
fn pmf_report_is_versioned() {
    let v = json_ok(&["pmf", "--m", "10", "--family", "vm", "--method", "marginalized", "--kappa", "2", "--t", "3"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "pmf");
    assert_eq!(v["config"]["family"], "mdvm");
    let probs: Vec<f64> = serde_json::from_value(v["result"]["probs"].clone()).unwrap();
    assert_eq!(probs.len(), 10);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    assert!((probs[2] - probs[3]).abs() < 1e-10);
}

#[test]
fn pmf_csv_has_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("p.csv");
    json_ok(&["pmf", "--m", "6", "--rho", "0.4", "--csv", csv.to_str().unwrap()]);
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,theta,p");
    assert_eq!(lines.len(), 7);
}

#[test]
fn fit_on_uniform_data_gives_small_kappa() {
    let dir = TempDir::new().unwrap();
    let l = Lattice::new(37).unwrap();
    let data = sample_pmf(&Pmf::uniform(l), 1000, RngSeed(8));
    let f = write_seq(dir.path(), "u.csv", &data);
    let v = json_ok(&["fit", "--input", &f, "--m", "37", "--family", "cdvm", "--bootstrap", "0"]);
    assert_eq!(v["config"]["n"], 1000);
    assert!(v["result"]["fit"]["tau_hat"].as_f64().unwrap() < 0.2);
}

#[test]
fn out_of_range_value_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let f = write_seq(dir.path(), "bad.csv", &[0, 36, 37]);
    let out = circlat(&["fit", "--input", &f, "--m", "37"]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_of(&out);
    assert_eq!(e["kind"], "data");
    assert!(e["message"].as_str().unwrap().contains("line 3"));
}

#[test]
fn order_sensitive_commands_reject_frequencies() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("freq.csv");
    fs::write(&f, "0,5\n1,5\n").unwrap();
    for cmd in ["changepoint", "test-serial"] {
        let out = circlat(&[cmd, "--input", f.to_str().unwrap(), "--m", "4", "--format", "frequency-csv"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert_eq!(error_of(&out)["kind"], "usage");
    }
}

#[test]
fn bad_flags_exit_two_with_json() {
    let out = circlat(&["pmf", "--m", "5", "--family", "cdwc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("--rho"));
    let out = circlat(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "usage");
}

#[test]
fn numeric_failures_exit_four() {
    // a heavy-tailed stable kernel near ρ = 1 needs more series terms than allowed
    let out = circlat(&["pmf", "--m", "10", "--family", "cdstable", "--rho", "0.999", "--a", "0.3"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["kind"], "numeric");
    let out = circlat(&["divergence-scan", "--m", "10", "--other", "mdvm", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frequency_input_feeds_mixture() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("freq.csv");
    let counts: Vec<String> = (0..48).map(|r| format!("{r},{}", if r < 44 { 8 } else { 7 })).collect();
    fs::write(&f, counts.join("\n")).unwrap();
    let cfg = dir.path().join("mcmc.txt");
    fs::write(&cfg, SHORT_MCMC).unwrap();
    let v = json_ok(&[
        "mixture",
        "--input",
        f.to_str().unwrap(),
        "--m",
        "48",
        "--format",
        "frequency-csv",
        "--components",
        "2",
        "--mcmc-config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert_eq!(v["config"]["n"], 380);
    let names: Vec<&str> =
        v["result"]["summaries"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"w1") && names.contains(&"t2"), "{names:?}");
}

#[test]
fn uniformity_test_detects_weak_concentration() {
    let dir = TempDir::new().unwrap();
    let l = Lattice::new(37).unwrap();
    let data = sample_pmf(&pmf_cdwc(l, 0.03, 10).unwrap(), 8106, RngSeed(21));
    let f = write_seq(dir.path(), "d3.csv", &data);
    let v = json_ok(&["test-uniformity", "--input", &f, "--m", "37", "--family", "cdwc", "--replicates", "999"]);
    let tests = v["result"]["tests"].as_array().unwrap();
    assert_eq!(tests[0]["statistic"], "T");
    assert_eq!(tests[0]["replications"], 999);
    assert!(tests[0]["p_value"].as_f64().unwrap() < 0.01, "{}", tests[0]);
    assert_eq!(tests.len(), 4);
}

#[test]
fn stream_csv_matches_library() {
    let dir = TempDir::new().unwrap();
    let l = Lattice::new(20).unwrap();
    let mut data = sample_pmf(&Pmf::uniform(l), 150, RngSeed(1));
    data.extend(sample_pmf(&pmf_cdwc(l, 0.6, 4).unwrap(), 150, RngSeed(2)));
    let f = write_seq(dir.path(), "cp.csv", &data);
    let cfg = dir.path().join("mcmc.txt");
    fs::write(&cfg, SHORT_MCMC).unwrap();
    let csv = dir.path().join("stream.csv");
    json_ok(&[
        "changepoint",
        "--input",
        &f,
        "--m",
        "20",
        "--stream",
        "100,200,300",
        "--seed",
        "6",
        "--mcmc-config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let mcmc = McmcConfig::parse(SHORT_MCMC).unwrap();
    let posts = changepoint_stream(&data, &[100, 200, 300], &ChangepointModel::new(l), &mcmc, RngSeed(6)).unwrap();
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (row, post) in rows.iter().zip(&posts) {
        let k = post.summary("K").unwrap();
        let rho = post.summary("rho2").unwrap();
        assert_eq!(row[2].parse::<f64>().unwrap(), k.lo95);
        assert_eq!(row[3].parse::<f64>().unwrap(), k.hi95);
        assert_eq!(row[5].parse::<f64>().unwrap(), rho.lo95);
        assert_eq!(row[6].parse::<f64>().unwrap(), rho.hi95);
    }
}

#[test]
fn sample_then_fit_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("s.csv");
    let out = circlat(&[
        "sample",
        "--m",
        "24",
        "--n",
        "2000",
        "--rho",
        "0.6",
        "--t",
        "7",
        "--seed",
        "12",
        "--out",
        f.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json_ok(&["fit", "--input", f.to_str().unwrap(), "--m", "24", "--bootstrap", "200", "--seed", "3"]);
    let fit = &v["result"]["fit"];
    assert_eq!(fit["t_hat"], 7);
    let (rho, se) = (fit["tau_hat"].as_f64().unwrap(), fit["se_tau"].as_f64().unwrap());
    assert!((rho - 0.6).abs() < 3.0 * se, "rho {rho} se {se}");
}

#[test]
fn same_seed_same_report() {
    let dir = TempDir::new().unwrap();
    let l = Lattice::new(12).unwrap();
    let f = write_seq(dir.path(), "x.csv", &sample_pmf(&Pmf::uniform(l), 300, RngSeed(2)));
    let args = ["test-serial", "--input", f.as_str(), "--m", "12", "--replicates", "199", "--seed", "77"];
    let a = circlat(&args);
    let b = circlat(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 77);
}

#[test]
fn sheppard_and_scan_reports() {
    let v = json_ok(&["sheppard", "--m-list", "3,5"]);
    let rows = v["result"].as_array().unwrap();
    assert!((rows[0]["cdwc_cos1"].as_f64().unwrap() - 0.667).abs() < 5e-4);
    let v = json_ok(&["divergence-scan", "--m", "10", "--step", "0.01"]);
    assert!((v["result"]["l1"]["value"].as_f64().unwrap() - 0.639).abs() < 0.01);
}
