//! Experiment manifests: one JSON per file-writing invocation, written to
//! `<primary-output>.manifest.json`.
//!
//! A manifest records the command line, the resolved configuration and its
//! hash, sha256 of every input file, the list of output files, the seed
//! and the wall time. Numeric outputs are deterministic functions of the
//! configuration, the inputs and the seed, so a manifest is a rerun
//! recipe; only the wall-time entries vary between identical reruns.

use bcpatch_core::Result;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = concat!("bcpatch ", env!("CARGO_PKG_VERSION"));

#[derive(Serialize)]
struct ExperimentManifest<'a> {
    schema_version: u32,
    tool_version: &'static str,
    command_line: &'a [String],
    config: &'a BTreeMap<String, Value>,
    config_hash: String,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a [String],
    seeds: &'a [u64],
    wall_time_s: f64,
}

/// Accumulates inputs and outputs while a command runs; `write` turns the
/// record into the manifest file.
pub struct Tracker {
    started: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Tracker {
    pub fn new() -> Self {
        Tracker {
            started: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Write `<primary>.manifest.json`. The manifest itself is not listed
    /// among the outputs; the config hash covers the resolved config map
    /// serialized with sorted keys.
    pub fn write(
        self,
        primary: &Path,
        argv: &[String],
        config: &BTreeMap<String, Value>,
        seeds: &[u64],
    ) -> Result<PathBuf> {
        let config_hash = hex(&Sha256::digest(serde_json::to_vec(config)?));
        let manifest = ExperimentManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            command_line: argv,
            config,
            config_hash,
            inputs: &self.inputs,
            outputs: &self.outputs,
            seeds,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut os = primary.as_os_str().to_owned();
    os.push(".manifest.json");
    PathBuf::from(os)
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)?;
    Ok(hex(&hasher.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
