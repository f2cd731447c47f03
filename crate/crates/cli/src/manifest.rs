use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One JSON line of the run log.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: serde_json::Value,
    /// Input path → SHA-256 (null when unreadable).
    pub inputs: BTreeMap<String, Option<String>>,
    pub outputs: BTreeMap<String, Option<String>>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_secs: u64,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn append_to(&self, path: &Path) -> std::io::Result<()> {
        let mut line = serde_json::to_string(self).map_err(std::io::Error::other)?;
        line.push('\n');
        OpenOptions::new().create(true).append(true).open(path)?.write_all(line.as_bytes())
    }
}

pub fn sha256_file(path: &Path) -> Option<String> {
    let mut file = File::open(path).ok()?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).ok()?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Some(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Files a command read and wrote, digested when the manifest is written.
#[derive(Debug, Default)]
pub struct FileLog {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl FileLog {
    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    pub fn digests(&self) -> (BTreeMap<String, Option<String>>, BTreeMap<String, Option<String>>) {
        let digest = |ps: &[PathBuf]| ps.iter().map(|p| (p.display().to_string(), sha256_file(p))).collect();
        (digest(&self.inputs), digest(&self.outputs))
    }
}
