//! The `frameforge` binary: subcommands, CSV headers, exit codes, config files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frameforge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn frame_bounds_of_orthonormal_basis() {
    let o = run(&["frame-bounds", "--system", data("orthonormal.json").to_str().unwrap(), "--grid-n", "64"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().skip_while(|l| !l.starts_with("system,")).nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "orthonormal");
    let a: f64 = fields[fields.len() - 3].parse().unwrap();
    let b: f64 = fields[fields.len() - 2].parse().unwrap();
    assert!((a - 1.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9, "{row}");
}

#[test]
fn gabor_csv_file() {
    let dir = std::env::temp_dir().join(format!("frameforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("gabor.csv");
    let o = run(&["gabor", "--window", "indicator(0,0.5)", "--p", "1", "--q", "2", "--M", "256", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,M,A53,B53,verdict,zz_min,zz_max"));
    assert!(lines.next().unwrap().contains("frame_certified"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_subcommand_runs() {
    let set = data("unit_interval.json");
    let pair = data("packing_pair.json");
    let cases: Vec<Vec<String>> = vec![
        vec!["density".into(), "--points".into(), data("half_line_pair.json").display().to_string(), "--h".into(), "10,100".into()],
        vec!["overlap".into(), "--set".into(), pair.display().to_string(), "--x-max".into(), "2".into(), "--step".into(), "0.25".into()],
        vec!["residue".into(), "--set".into(), pair.display().to_string(), "--lattice".into(), "2".into()],
        vec!["construct".into(), "--set".into(), pair.display().to_string(), "--lattice".into(), "2".into(), "--grid-n".into(), "64".into()],
        vec!["construct".into(), "--set".into(), set.display().to_string(), "--window".into(), "x".into(), "--window".into(), "1-x".into()],
        vec!["obstruction".into(), "--set".into(), "cantor_tower:12:5".into(), "--x-max".into(), "3".into()],
        vec!["certify-measure".into(), "--set".into(), set.display().to_string(), "--x0".into(), "2".into(), "--trials".into(), "5".into()],
    ];
    let headers = [
        "h,inf_density,sup_density",
        "x,value",
        "verdict,delta,collision_measure",
        "system,grid_n,trunc,A_est,B_est,tight_ratio",
        "system,grid_n,trunc,A_est,B_est,tight_ratio",
        "start,end",
        "x0,residual,trials",
    ];
    for (args, header) in cases.iter().zip(headers) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().any(|l| l == header), "{args:?}: missing {header}\n{}", stdout(&o));
    }
}

#[test]
fn refusals_are_verdicts() {
    let o = run(&["construct", "--set", data("packing_pair.json").to_str().unwrap(), "--lattice", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: refused"));
    let o = run(&["construct", "--set", data("unit_interval.json").to_str().unwrap(), "--window", "sqrt(x)"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: refused"));
    let o = run(&["certify-measure", "--set", data("unit_interval.json").to_str().unwrap(), "--x0", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: refused"));
}

#[test]
fn input_errors_exit_nonzero_with_one_line() {
    for args in [
        vec!["frame-bounds", "--system", "/nonexistent/system.json"],
        vec!["gabor", "--window", "x +", "--M", "64"],
        vec!["gabor", "--window", "indicator(0,1)", "--q", "3", "--M", "64"],
        vec!["frame-bounds", "--system", "x.json", "--grid-n", "0"],
        vec!["overlap", "--set", "cantor_tower:1"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
    let o = run(&["frame-bounds", "--system", "x.json", "--grid-n", "0"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_n"));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_and_thread_cap() {
    let cfg = data("verify.config.json");
    let o = Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .env("FRAMEFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("12/12 criteria passed"), "{out}");
    assert!(out.contains("criterion,name,status,value,threshold"));
    let o = Command::new(env!("CARGO_BIN_EXE_frameforge"))
        .args(["gabor", "--window", "indicator(0,1)"])
        .env("FRAMEFORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FRAMEFORGE_THREADS"));
}
