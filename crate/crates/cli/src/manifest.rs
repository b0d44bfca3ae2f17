use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "warpwatch";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Run metadata written next to, or inside, every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub parameters: Map<String, Value>,
    pub inputs: Vec<InputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            parameters: Map::new(),
            inputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    /// Read a file, record its hash and hand the bytes back.
    pub fn read_input(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputFile {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    /// JSON value with a trailing `manifest_sha256` computed over everything before it.
    pub fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        let hash = sha256_hex(serde_json::to_string(&v).expect("json").as_bytes());
        v.as_object_mut()
            .expect("object")
            .insert("manifest_sha256".into(), Value::String(hash));
        v
    }
}

/// `*.csv` files in a directory, sorted by name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::input(e.to_string()))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
