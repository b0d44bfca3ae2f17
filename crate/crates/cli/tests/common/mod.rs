#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub fn warpwatch(args: &[&str]) -> Output {
    warpwatch_env(args, &[])
}

pub fn warpwatch_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_warpwatch"));
    cmd.args(args).env_remove("WARPWATCH_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn ok(out: Output) -> Output {
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

pub fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).expect("valid json")
}

/// `date,value` body rows, header skipped.
pub fn values(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

/// Synthetic case series, active series and two 8-keyword panels under `dir`.
pub fn synth_inputs(dir: &Path, length: usize) {
    ok(warpwatch(&[
        "synth", "--length", &length.to_string(), "--lag", "10", "--noise", "0.02", "--seed", "42",
        "--panel-keywords", "8", "--out", p(dir),
    ]));
}

pub fn sweep_args<'a>(inputs: &'a Path, out: &'a Path) -> Vec<String> {
    vec![
        "sweep".into(),
        "--rescale-panel".into(),
        p(&inputs.join("panel_rescale")).into(),
        "--msv-panel".into(),
        p(&inputs.join("panel_msv")).into(),
        "--confirmed".into(),
        p(&inputs.join("case.csv")).into(),
        "--active".into(),
        p(&inputs.join("active.csv")).into(),
        "--out".into(),
        p(out).into(),
    ]
}
