//! Run manifest: every artifact a run writes, listed with a content hash so
//! reruns can be compared file by file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::CliError;

#[derive(Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub artifacts: Vec<ManifestEntry>,
    #[serde(skip)]
    root: PathBuf,
}

impl Manifest {
    pub fn new(root: &Path, seed: u64) -> Self {
        Self {
            seed,
            artifacts: Vec::new(),
            root: root.to_path_buf(),
        }
    }

    /// Registers a file that was just written; records its hash.
    pub fn add(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::stage("manifest", format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        self.artifacts.push(ManifestEntry {
            path: rel.display().to_string(),
            sha256: hex::encode(digest),
        });
        Ok(())
    }

    /// Writes `manifest.json` into the run root (the manifest itself is the
    /// only unlisted file).
    pub fn write(mut self) -> Result<PathBuf, CliError> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let path = self.root.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&self)
            .map_err(|e| CliError::stage("manifest", e))?;
        bytes.push(b'\n');
        fs::write(&path, bytes)
            .map_err(|e| CliError::stage("manifest", format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
