use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one run: what was asked for, what it read, what it wrote.
/// Output paths are relative to the manifest's own directory.
#[derive(Debug, Serialize)]
pub struct RunManifest<F: Serialize> {
    pub subcommand: &'static str,
    pub tool_version: &'static str,
    pub flags: F,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub env: BTreeMap<&'static str, String>,
    pub inputs: BTreeMap<&'static str, InputDigest>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl<F: Serialize> RunManifest<F> {
    pub fn new(subcommand: &'static str, flags: F) -> Self {
        RunManifest {
            subcommand,
            tool_version: env!("CARGO_PKG_VERSION"),
            flags,
            env: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, flag: &'static str, path: &Path) -> Result<(), CliError> {
        let sha256 = sha256_file(path)?;
        self.inputs.insert(
            flag,
            InputDigest {
                path: path.display().to_string(),
                sha256,
            },
        );
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest to `path`, rewriting output paths relative to its
    /// directory where possible.
    pub fn write(mut self, path: &Path) -> Result<(), CliError> {
        let parent = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let dir = absolute(parent);
        for out in &mut self.outputs {
            let abs = absolute(Path::new(out.as_str()));
            if let Ok(rel) = abs.strip_prefix(&dir) {
                *out = rel.display().to_string();
            }
        }
        let mut json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        json.push('\n');
        fs::write(path, json).map_err(|e| CliError::io(path, e))
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// `<output>.manifest.json`, next to the output file.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
