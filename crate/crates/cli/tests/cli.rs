use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn segal(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SEGAL_OUT_DIR")
        .output()
        .expect("spawn segal")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn det_verify_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = segal(dir.path(), &["det-verify", "--t1", "1", "--t2", "1", "--parity", "even", "--ncut", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("det-even.json"));
    for key in ["claim_id", "lhs", "rhs", "rel_err", "tolerance", "pass", "seed", "n_cut"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(r["rel_err"].as_f64().unwrap() <= 1e-10);
    assert!(r["details"]["tail_bound"].as_f64().is_some());
    let m = read_json(&dir.path().join("det-even.manifest.json"));
    assert_eq!(m["config"]["parity"], "even");
    assert_eq!(m["library_version"], env!("CARGO_PKG_VERSION"));
    let csv = std::fs::read_to_string(dir.path().join("det-even.csv")).unwrap();
    assert!(csv.starts_with("n_cut,rel_err,tail_bound\n"));
    let svg = std::fs::read_to_string(dir.path().join("det-even.svg")).unwrap();
    assert!(svg.contains("version=\"1.1\""));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(segal(dir.path(), &["det-verify", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["det-verify", "--t1", "abc"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["det-verify", "--t1", "-1"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["det-verify", "--parity", "odd"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["det-verify", "--tolerance", "1e-30"]).status.code(), Some(2));
    assert_eq!(segal(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# moduli\nt1 = 0.5\nt2 = 2\nparity = full\n").unwrap();
    let o = segal(dir.path(), &["det-verify", "--config", cfg.to_str().unwrap(), "--t2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&dir.path().join("det-full.manifest.json"));
    assert_eq!(m["config"]["t1"], "0.5");
    assert_eq!(m["config"]["t2"], "3");

    std::fs::write(&cfg, "t1 = 0.5\nunknown_key = 4\n").unwrap();
    let o = segal(dir.path(), &["det-verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(diag["error"], "config");
    assert!(diag["message"].as_str().unwrap().contains("unknown_key"));

    std::fs::write(&cfg, "t1 0.5\n").unwrap();
    assert_eq!(segal(dir.path(), &["det-verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_segal"))
        .args(["dn-verify", "--geometry", "full", "--ncut", "40"])
        .env("SEGAL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("dn-jump-full.json"));
    assert!(r["abs_err"].as_f64().unwrap() <= 1e-12);
    assert!(r["details"]["markov_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn gluing_both_geometries() {
    let dir = tempfile::tempdir().unwrap();
    for (geom, id) in [("half", "glue-half"), ("annulus", "glue-annulus")] {
        let o = segal(dir.path(), &["glue-verify", "--geometry", geom, "--ncut", "30", "--t1", "0.7", "--t2", "1.4"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read_to_string(dir.path().join(format!("{id}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 31);
        assert!(read_json(&dir.path().join(format!("{id}.json")))["rel_err"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args =
        ["gmc", "--gamma", "1", "--k", "4", "--p", "1", "--samples", "500", "--seed", "9", "--curve-points", "3"];
    assert_eq!(segal(a.path(), &args).status.code(), Some(0));
    assert_eq!(segal(b.path(), &args).status.code(), Some(0));
    for file in ["gmc-moment.json", "gmc-moment.csv", "gmc-moment.svg", "gmc-moment.manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let svg = std::fs::read_to_string(a.path().join("gmc-moment.svg")).unwrap();
    assert!(svg.contains(">p2<"));
}

#[test]
fn empty_series_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = segal(dir.path(), &["gmc", "--k", "4", "--samples", "200", "--curve-points", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("gmc-moment.csv")).unwrap(), "p,mean,stderr\n");
}

#[test]
fn semigroup_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = segal(
        dir.path(),
        &["semigroup", "--obs", "1;0.5:x=1;0.25:x=0,1", "--phi", "0.3,-0.5", "--c0", "0.2", "--samples", "4000"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("semigroup-half.json"));
    assert!(r["rhs"].as_f64().is_some() && r["stderr"].as_f64().unwrap() > 0.0);

    let o = segal(
        dir.path(),
        &["semigroup", "--geometry", "bulk", "--mu", "1", "--obs", "1:y=1", "--phi", "0.1,0.2", "--samples", "500"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read_json(&dir.path().join("semigroup-bulk.json"))["rhs"].is_null());

    let o = segal(
        dir.path(),
        &["semigroup", "compose-check", "--t", "0.2", "--s", "0.3", "--mu", "1", "--samples", "2000"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("semigroup-compose-half.json").exists());

    assert_eq!(segal(dir.path(), &["semigroup", "--obs", "1:z=1"]).status.code(), Some(1));
    assert_eq!(segal(dir.path(), &["semigroup", "--geometry", "bulk", "--phi", "0.1"]).status.code(), Some(1));
}

#[test]
fn report_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let o = segal(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("summary.csv")).unwrap(),
        "claim_id,pass,error,tolerance,file\n"
    );
    segal(dir.path(), &["det-verify"]);
    segal(dir.path(), &["dn-verify", "--ncut", "20"]);
    assert_eq!(segal(dir.path(), &["report"]).status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.contains("det-full,true"));
    segal(dir.path(), &["det-verify", "--parity", "even", "--tolerance", "1e-30"]);
    assert_eq!(segal(dir.path(), &["report"]).status.code(), Some(2));
}
