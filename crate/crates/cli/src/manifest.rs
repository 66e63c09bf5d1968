//! Run manifests embedded in every result file.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use hz_core::qseries::sha256_hex;
use hz_core::{HzError, Result};

/// Wall time is printed to stderr, not stored, so identical runs give identical files.
pub struct Manifest {
    command: String,
    parameters: BTreeMap<String, Value>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    strict: bool,
    threads: usize,
    precision_bits: u32,
}

impl Manifest {
    pub fn new(command: &str, threads: usize, precision_bits: u32) -> Manifest {
        Manifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: vec![],
            strict: false,
            threads,
            precision_bits,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) -> &mut Manifest {
        self.parameters.insert(key.to_string(), v.into());
        self
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn output(&mut self, path: &str) {
        self.outputs.push(path.to_string());
    }

    pub fn strict(&mut self, on: bool) {
        self.strict = on;
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "version": env!("CARGO_PKG_VERSION"),
            "flags": { "strict": self.strict },
            "threads": self.threads,
            "precision_bits": self.precision_bits,
            "outputs": self.outputs,
        })
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let io = |e: std::io::Error| HzError::pre(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| HzError::pre(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, text).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}
