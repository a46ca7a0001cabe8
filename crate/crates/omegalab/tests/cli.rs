use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn demo(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("demo")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omegalab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(out: &Output) -> Vec<Value> {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn kind<'a>(rows: &'a [Value], k: &str) -> Vec<&'a Value> {
    rows.iter().filter(|r| r["kind"] == k).collect()
}

#[test]
fn omega_toy3() {
    let toy3 = demo("toy3.toml");
    let out = run(&["omega", "--machine", &toy3, "--T", "1/2", "--budget", "100"]);
    let rows = rows(&out);
    let omega = kind(&rows, "omega");
    assert_eq!(omega.len(), 1);
    assert_eq!(omega[0]["lower_bound"], "21/64");
    assert_eq!(omega[0]["complete"], "true");
    let bounds: Vec<_> = kind(&rows, "event")
        .iter()
        .map(|r| r["lower_bound"].clone())
        .collect();
    assert_eq!(bounds, ["1/4", "5/16", "21/64"]);
}

#[test]
fn provenance_on_every_row() {
    let toy3 = demo("toy3.toml");
    let out = run(&[
        "dim",
        "--machine",
        &toy3,
        "--source",
        "5/8",
        "--nmax",
        "6",
        "--T",
        "1/2",
    ]);
    for r in rows(&out) {
        for key in ["command", "machine", "T", "budget", "prec"] {
            assert!(r.get(key).is_some(), "{key} missing from {r}");
        }
    }
}

#[test]
fn dim_prefixes() {
    let toy3 = demo("toy3.toml");
    let out = run(&["dim", "--machine", &toy3, "--source", "5/8", "--nmax", "6"]);
    let prefixes: Vec<_> = kind(&rows(&out), "profile")
        .iter()
        .map(|r| r["prefix"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(prefixes, ["1", "10", "101", "1010", "10100", "101000"]);
}

#[test]
fn split_worked_instance() {
    let out = run(&[
        "split",
        "--a",
        "geom:1,1/2",
        "--c",
        "geom:1,1/2",
        "--r",
        "1",
        "--eps",
        "1/4",
        "--N",
        "2",
    ]);
    let rows = rows(&out);
    let b: Vec<_> = kind(&rows, "b").iter().map(|r| r["b"].clone()).collect();
    assert_eq!(b, ["3/8", "3/16"]);
    let s = kind(&rows, "split");
    assert_eq!(s[0]["residual"], "0");
    assert_eq!(s[0]["q"], "1/4");
}

#[test]
fn csv_headers_follow_columns() {
    let toy3 = demo("toy3.toml");
    let out = run(&["omega", "--machine", &toy3, "--T", "1/2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let headers: Vec<_> = text.lines().filter(|l| l.starts_with("command,")).collect();
    assert_eq!(headers.len(), 3);
    assert!(text.contains(",21/64,"));
}

#[test]
fn malformed_spec_echoes_entries() {
    let out = run(&["machine", "--machine", &demo("bad_prefix.toml")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("not prefix-free"), "{err}");
    assert!(err.contains("entry 0: program = \"0\""), "{err}");
    assert!(err.contains("entry 1: program = \"01\""), "{err}");
}

#[test]
fn divergent_temperature() {
    let out = run(&["omega", "--machine", &demo("toy3.toml"), "--T", "3/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("diverges"));
}

#[test]
fn unknown_command() {
    let out = run(&["bogus"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn generated_machines_are_reproducible() {
    let a = run(&["machine", "--generate", "16", "--seed", "5"]);
    let b = run(&["machine", "--generate", "16", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["machine", "--generate", "16", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}
