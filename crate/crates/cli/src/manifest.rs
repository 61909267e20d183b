//! Run manifests: command, resolved settings, seed, and content digests of
//! every input and output, so any artifact can be reproduced from its
//! manifest alone. No timestamps; reruns produce byte-identical manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub settings: BTreeMap<String, String>,
    pub seed: u64,
    pub settings_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            settings: BTreeMap::new(),
            seed,
            settings_sha256: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.inputs.push(digest_file(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.outputs.push(digest_file(path)?);
        Ok(self)
    }

    /// Finalizes the settings hash and writes `<target>` as pretty JSON.
    pub fn write(&mut self, target: &Path) -> Result<(), CliError> {
        let canonical: String = self
            .settings
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        self.settings_sha256 = hex_digest(canonical.as_bytes());
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(target, json)
            .map_err(|e| CliError::Io { path: target.display().to_string(), source: e })
    }
}

/// Manifest path convention for a primary output file: `<file>.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn digest_file(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    Ok(FileDigest { path: path.display().to_string(), sha256: hex_digest(&bytes) })
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
