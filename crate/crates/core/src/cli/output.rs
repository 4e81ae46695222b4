//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::sha256_hex;
use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    /// Whether the file carries the config hash in its text.
    pub embeds_hash: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub artifacts: Vec<Artifact>,
}

/// Writes artifacts under one directory and records them for the manifest.
pub struct OutputDir {
    root: PathBuf,
    hash: String,
    command: String,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path, command: &str, hash: &str) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_owned(), hash: hash.to_owned(), command: command.to_owned(), artifacts: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn put(&mut self, rel: &str, bytes: &[u8], embeds_hash: bool) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.artifacts.push(Artifact { path: rel.to_owned(), sha256: sha256_hex(bytes), embeds_hash });
        Ok(())
    }

    /// Text whose first line already carries the hash (CSV tables).
    pub fn text(&mut self, rel: &str, text: &str) -> Result<()> {
        self.put(rel, text.as_bytes(), true)
    }

    /// Pretty JSON with a trailing newline. The value must embed the hash.
    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.put(rel, s.as_bytes(), true)
    }

    pub fn binary(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        self.put(rel, bytes, false)
    }

    pub fn finish(self) -> Result<Manifest> {
        let m = Manifest { command: self.command, config_sha256: self.hash, artifacts: self.artifacts };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        fs::write(self.root.join(MANIFEST), s)?;
        Ok(m)
    }
}

/// Re-hashes every artifact listed in a manifest and checks that text
/// artifacts carry the config hash. Returns the list of problems.
pub fn verify_manifest(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    let root = path.parent().unwrap_or(Path::new("."));
    let mut problems = Vec::new();
    for a in &m.artifacts {
        match fs::read(root.join(&a.path)) {
            Err(e) => problems.push(format!("{}: {e}", a.path)),
            Ok(bytes) => {
                if sha256_hex(&bytes) != a.sha256 {
                    problems.push(format!("{}: content hash changed", a.path));
                }
                if a.embeds_hash && !String::from_utf8_lossy(&bytes).contains(&m.config_sha256) {
                    problems.push(format!("{}: config hash missing", a.path));
                }
            }
        }
    }
    Ok(problems)
}
