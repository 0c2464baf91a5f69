use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, StageName};
use crate::insight::FileEntry;

/// Record of one completed stage run, stored as `manifests/<stage>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stage: StageName,
    /// Work-relative name (or label) to sha256.
    pub inputs: BTreeMap<String, String>,
    pub config_hash: String,
    pub config: serde_json::Value,
    /// Work-relative paths, sorted.
    pub outputs: Vec<FileEntry>,
    pub wall_time_secs: f64,
}

impl StageManifest {
    pub fn path(work: &Path, stage: StageName) -> PathBuf {
        work.join("manifests").join(format!("{}.json", stage.name()))
    }

    pub fn load(work: &Path, stage: StageName) -> Result<Option<Self>, PipelineError> {
        let p = Self::path(work, stage);
        if !p.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_slice(&fs::read(p)?)?))
    }

    pub fn save(&self, work: &Path) -> Result<(), PipelineError> {
        let p = Self::path(work, self.stage);
        fs::create_dir_all(p.parent().unwrap())?;
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        fs::write(p, json)?;
        Ok(())
    }

    /// True when inputs and config match and every output is still on disk unchanged.
    pub fn is_current(
        &self,
        work: &Path,
        inputs: &BTreeMap<String, String>,
        config_hash: &str,
    ) -> Result<bool, PipelineError> {
        if &self.inputs != inputs || self.config_hash != config_hash {
            return Ok(false);
        }
        for f in &self.outputs {
            let p = work.join(&f.name);
            if !p.is_file() || sha256_file(&p)? != f.sha256 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Entry for a file under `work`, named by its work-relative path.
pub fn file_entry(work: &Path, path: &Path) -> Result<FileEntry, PipelineError> {
    let name = path
        .strip_prefix(work)
        .unwrap_or(path)
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/");
    Ok(FileEntry {
        name,
        bytes: fs::metadata(path)?.len(),
        sha256: sha256_file(path)?,
    })
}

/// Every regular file below `dir`, sorted.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d)? {
            let p = e?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}
