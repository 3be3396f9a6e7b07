use std::fs;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::Output;
use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
struct Entry<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    inputs: Vec<Entry<'a>>,
    artifacts: Vec<Entry<'a>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact, then the manifest, into `cfg.output_dir`.
pub fn write(cfg: &RunConfig, command: &str, output: &Output) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut artifacts = Vec::new();
    for (name, bytes) in &output.artifacts {
        fs::write(cfg.output_dir.join(name), bytes)?;
        artifacts.push(Entry {
            file: name,
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
    }
    let inputs = output
        .inputs
        .iter()
        .map(|(name, bytes)| Entry {
            file: name,
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        })
        .collect();
    let manifest = Manifest {
        tool: "pairscope",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        inputs,
        artifacts,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(cfg.output_dir.join(MANIFEST_FILE), text)?;
    Ok(())
}
