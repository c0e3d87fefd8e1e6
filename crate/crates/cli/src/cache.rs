//! File-per-key result store. Writers go through a temporary file and a
//! rename, so concurrent runs never expose a partial record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::record::{hex, RunRecord};

/// Environment variable naming the cache directory when no flag is given.
pub const CACHE_ENV: &str = "OPSYS_INDEX_CACHE";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The key covers the input digest and every solver parameter, so a
    /// changed tolerance is a miss.
    pub fn key(digest: &str, tol: f64, max_iter: usize) -> String {
        let mut h = Sha256::new();
        h.update(format!("{digest}\ntol={:e}\nmax_iter={max_iter}", tol).as_bytes());
        hex(&h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A corrupted or mismatched file is reported and treated as a miss.
    pub fn lookup(&self, digest: &str, tol: f64, max_iter: usize) -> Option<RunRecord> {
        let path = self.path(&Self::key(digest, tol, max_iter));
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<RunRecord>(&text) {
            Ok(r) if r.inputs == digest && r.solver.tol == tol && r.solver.max_iter == max_iter => Some(r),
            Ok(_) => {
                log::warn!("cache record {} does not match its key; recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("skipping corrupted cache record {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store(&self, record: &RunRecord) -> std::io::Result<PathBuf> {
        let path = self.path(&Self::key(&record.inputs, record.solver.tol, record.solver.max_iter));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(record.to_json().as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }
}
