use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn affsieve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affsieve")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = affsieve(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn reports_identical_across_pool_sizes() {
    let runs: [&[&str]; 5] = [
        &["count", "--m", "2", "--grid", "10,20,40,80"],
        &["densities", "--f", "x11*x22", "--dmax", "30"],
        &["sieve", "--f", "x11+x22", "--T", "60", "--z", "12"],
        &["construct", "--count", "6", "--seed", "11"],
        &["uniformity", "--q", "3", "--grid", "20,40"],
    ];
    for args in runs {
        let one = affsieve(&[&["--threads", "1"], args].concat());
        let eight = affsieve(&[&["--threads", "8"], args].concat());
        assert!(one.status.success(), "{args:?}: {}", String::from_utf8_lossy(&one.stderr));
        assert_eq!(one.stdout, eight.stdout, "{args:?}");
    }
}

#[test]
fn envelope_embeds_config_and_versions() {
    let r = report(&["bounds", "--sln", "3", "--t", "1", "--deg", "1"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["artifact_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["params"]["sln"], "3");
    assert_eq!(r["result"]["sln"]["general"]["threshold"]["num"], 486);
    let d = report(&["bounds", "--division", "2"]);
    let v = d["result"]["division_algebra"]["threshold"].as_f64().unwrap();
    assert!((v - 9.4526).abs() < 5e-4);
    assert_eq!(d["result"]["division_algebra"]["r0_upper"], 9);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| affsieve(args).status.code();
    assert_eq!(code(&["count", "--m", "0", "--grid", "5"]), Some(2));
    assert_eq!(code(&["count", "--m", "1", "--grid", ""]), Some(2));
    assert_eq!(code(&["count", "--m", "1"]), Some(2));
    assert_eq!(code(&["bounds", "--sln", "1"]), Some(2));
    assert_eq!(code(&["construct", "--n", "2"]), Some(2));
    assert_eq!(code(&["sieve", "--T", "30", "--levels", "10,40", "--rho-dmax", "20"]), Some(2));
    assert_eq!(code(&["densities", "--f", "x33"]), Some(2));
    assert_eq!(code(&["uniformity", "--q", "1000", "--grid", "10"]), Some(3));
    assert_eq!(code(&["count", "--m", "1", "--grid", "1000", "--budget", "100"]), Some(3));
    assert_eq!(code(&["bounds", "--sln", "3", "--csv", "x.csv"]), Some(2));
    assert_eq!(code(&["count", "--bogus", "1"]), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let path = tmp("count.cfg");
    std::fs::write(&path, "# count run\nm = 3\ngrid = 5,10\nnorm = max\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = report(&["count", "--config", p]);
    assert_eq!(from_file["result"]["m"], 3);
    let overridden = report(&["count", "--config", p, "--m", "1"]);
    assert_eq!(overridden["result"]["m"], 1);
    assert_eq!(overridden["config"]["params"]["grid"], "5,10");
    std::fs::write(&path, "q = 2\n").unwrap();
    assert_eq!(affsieve(&["count", "--config", p]).status.code(), Some(2));
}

#[test]
fn csv_and_json_files() {
    let json = tmp("count.json");
    let csv = tmp("count.csv");
    let out = affsieve(&[
        "count",
        "--m",
        "1",
        "--grid",
        "50,100,200,400",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let a = r["result"]["fit"]["a_est"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&a));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("T,count"));
}

#[test]
fn command_examples() {
    let d = report(&["densities", "--f", "x11", "--pmax", "13"]);
    assert_eq!(d["result"]["table"][0], serde_json::json!({"d": 1, "numerator": 1, "denominator": 1}));
    assert!(d["result"]["multiplicativity"].as_array().unwrap().iter().all(|x| x["holds"] == true));

    let s = report(&["sieve", "--m", "1", "--n", "2", "--f", "x11", "--T", "100", "--z", "1"]);
    assert_eq!(s["result"]["sifted"], s["result"]["X"]);
    let s = report(&["sieve", "--m", "1", "--n", "2", "--f", "x11", "--T", "100", "--z", "10"]);
    assert_eq!(s["result"]["P"], 210);
    assert_eq!(s["result"]["remainders"][0]["R"]["num"], 0);

    let u = report(&["uniformity", "--q", "1", "--grid", "10,30"]);
    assert!(u["result"]["rows"].as_array().unwrap().iter().all(|r| r["max_deviation"] == 0.0));

    let c = report(&["construct", "--n", "3", "--seed", "7"]);
    let cert = &c["result"]["certificates"][0];
    assert_eq!(cert["det"], 4);
    assert_eq!(cert["verified"], true);
    assert!(cert["congruences"].as_array().unwrap().iter().all(|x| x["holds"] == true));
}
