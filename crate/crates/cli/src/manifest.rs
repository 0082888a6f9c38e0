//! Run manifest written next to every command's outputs.

use std::path::{Path, PathBuf};

use insole_grf::dataio::TrialMeta;
use insole_grf::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::{sha256_hex, Outputs};

pub const MANIFEST_NAME: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub config: RunConfig,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Absent under `--deterministic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix_s: Option<u64>,
}

/// Hashes of the files a command read.
#[derive(Debug, Default)]
pub struct Inputs {
    files: Vec<FileHash>,
}

impl Inputs {
    pub fn add(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.add_bytes(path, &bytes);
        Ok(())
    }

    pub fn add_bytes(&mut self, path: &Path, bytes: &[u8]) {
        let path = path.display().to_string();
        if !self.files.iter().any(|f| f.path == path) {
            self.files.push(FileHash { path, sha256: sha256_hex(bytes) });
        }
    }

    /// A trial metadata file and the recordings it points to.
    pub fn add_trial(&mut self, meta_path: &Path) -> Result<()> {
        self.add(meta_path)?;
        let meta = TrialMeta::load(meta_path)?;
        let dir = meta_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        for rel in [&meta.insole, &meta.grf].into_iter().flatten() {
            self.add(&dir.join(rel))?;
        }
        Ok(())
    }
}

pub fn now_unix_s() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Stage the manifest describing everything already staged in `out`.
pub fn stage_manifest(out: &mut Outputs, command: &str, args: Vec<String>, cfg: &RunConfig, inputs: Inputs, deterministic: bool) -> Result<()> {
    let m = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        args,
        seed: cfg.seed,
        config: cfg.clone(),
        inputs: inputs.files,
        outputs: out.hashes().into_iter().map(|(path, sha256)| FileHash { path, sha256 }).collect(),
        created_unix_s: if deterministic { None } else { Some(now_unix_s()) },
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    out.add_str(MANIFEST_NAME, text)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}
