//! `run_manifest.json`: what ran, on which inputs, and what it wrote.

use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use govpulse_core::io::write_atomic;
use govpulse_core::Result;

pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    /// Hex SHA-256 of the file, `None` when it could not be read.
    pub sha256: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub status: &'static str,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            status: "ok",
            error: None,
        }
    }

    pub fn config(&mut self, cfg: impl Serialize) {
        self.config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    }

    pub fn input(&mut self, role: &str, path: &Path) {
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_file(path),
        });
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn fail(&mut self, msg: &str) {
        self.status = "failed";
        self.error = Some(msg.to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join(MANIFEST_NAME), body.as_bytes())
    }
}

pub fn sha256_file(path: &Path) -> Option<String> {
    let mut f = std::fs::File::open(path).ok()?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).ok()?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Some(hex::encode(h.finalize()))
}
