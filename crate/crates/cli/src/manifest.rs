//! Run manifests: resolved parameters plus content hashes of every input
//! and output, so a run can be reproduced and verified byte for byte.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
}

pub fn sha256_of(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("cannot hash {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Collects inputs/outputs, hashes them, and writes `manifest.json` into
/// the output directory.
pub struct ManifestBuilder {
    command: String,
    parameters: BTreeMap<String, serde_json::Value>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    out_dir: PathBuf,
}

impl ManifestBuilder {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn write(&self) -> Result<PathBuf> {
        let entry = |path: &PathBuf, relative_to: Option<&Path>| -> Result<FileEntry> {
            let shown = match relative_to {
                Some(base) => path
                    .strip_prefix(base)
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|_| path.display().to_string()),
                None => path.display().to_string(),
            };
            Ok(FileEntry {
                path: shown,
                sha256: sha256_of(path)?,
            })
        };
        let manifest = Manifest {
            command: self.command.clone(),
            parameters: self.parameters.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|p| entry(p, None))
                .collect::<Result<Vec<_>>>()?,
            outputs: self
                .outputs
                .iter()
                .map(|p| entry(p, Some(&self.out_dir)))
                .collect::<Result<Vec<_>>>()?,
        };
        let path = self.out_dir.join("manifest.json");
        let mut body = serde_json::to_string_pretty(&manifest)?;
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
