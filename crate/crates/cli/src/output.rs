use std::fs;
use std::path::Path;

use serde_json::Value;
use warpwatch_core::series::round_sig;

use crate::error::CliError;
use crate::manifest::RunManifest;

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    write_file(dir, name, &json_string(v))
}

/// `manifest.json` for the CSV artifacts in `dir`.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    write_json(dir, "manifest.json", &manifest.to_value())
}

/// Number rounded to 9 significant digits; non-finite values become null.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(round_sig(v)).map_or(Value::Null, Value::Number)
    } else {
        Value::Null
    }
}
