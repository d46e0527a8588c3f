use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Self-description of one run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub config: toml::Value,
    pub started_at: f64,
    pub finished_at: f64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Parameter checksums of any input checkpoint before and after the run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameter_checksums: BTreeMap<String, String>,
    #[serde(default)]
    pub summary: serde_json::Value,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn version_string() -> String {
    match option_env!("BILINEAR_AC_DESCRIBE") {
        Some(d) => d.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

/// Creates `<out>/<command>-<unix seconds>-<seed>`, suffixing on collision.
pub fn create_run_dir(out: &Path, command: &str, seed: u64) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let ts = unix_now() as u64;
    let base = format!("{command}-{ts}-{seed}");
    let mut dir = out.join(&base);
    let mut n = 1;
    while dir.exists() {
        dir = out.join(format!("{base}.{n}"));
        n += 1;
    }
    std::fs::create_dir(&dir)?;
    Ok(dir)
}

pub fn file_entry(dir: &Path, name: &str) -> Result<FileEntry> {
    let bytes = std::fs::read(dir.join(name))?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

impl RunManifest {
    /// Inventories `files` (relative to `dir`) and writes `manifest.json`
    /// through a temporary file and a rename.
    pub fn write(mut self, dir: &Path, files: &[String]) -> Result<PathBuf> {
        self.files = files.iter().map(|f| file_entry(dir, f)).collect::<Result<_>>()?;
        self.finished_at = unix_now();
        let tmp = dir.join(".manifest.json.tmp");
        let path = dir.join("manifest.json");
        std::fs::write(&tmp, serde_json::to_vec_pretty(&self)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?)
    }

    /// Every listed file exists with the recorded checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let now = file_entry(dir, &f.path)?;
            if now.sha256 != f.sha256 {
                return Err(Error::Contract(format!("{} changed since the manifest was written", f.path)));
            }
        }
        Ok(())
    }
}
