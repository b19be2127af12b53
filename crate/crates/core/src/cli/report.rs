use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::linalg::Matrix;

pub const SCHEMA_VERSION: u32 = 1;

/// A complex matrix as `{"dim": n, "data": [[re, im], ...]}` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsonMatrix {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&Matrix> for JsonMatrix {
    fn from(m: &Matrix) -> Self {
        JsonMatrix { dim: m.nrows(), data: m.iter().map(|z| [z.re, z.im]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeTiming {
    pub sites: usize,
    pub time: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub per_volume: Vec<VolumeTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub schema: u32,
    pub version: &'static str,
    pub command: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    /// Set when the command stopped early; `error` then says why.
    pub partial: bool,
    pub error: Option<String>,
    pub timings: Timings,
    /// SHA-256 of the serialized payload; timings are outside the payload.
    pub payload_sha256: String,
    pub payload: serde_json::Value,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: &ExperimentConfig, payload: serde_json::Value, passed: bool, timings: Timings) -> Self {
        let payload_sha256 = payload_digest(&payload);
        ReportEnvelope {
            schema: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            passed,
            partial: false,
            error: None,
            timings,
            payload_sha256,
            payload,
        }
    }

    pub fn failed(command: &str, config: &ExperimentConfig, error: String, payload: serde_json::Value, timings: Timings) -> Self {
        let mut env = Self::new(command, config, payload, false, timings);
        env.partial = true;
        env.error = Some(error);
        env
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }
}

pub fn payload_digest(payload: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(payload).expect("payload is serializable");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

/// Minimal CSV writer: fields are numbers or identifiers, never quoted.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Shortest round-trip form, e.g. `0.0`, `0.5`, `1e-10`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
