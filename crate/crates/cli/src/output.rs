//! Output staging. Commands build every file in memory and commit at the
//! end, so a failing command leaves nothing behind.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use insole_grf::{Error, Result};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct Outputs {
    root: PathBuf,
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Outputs { root: root.into(), files: BTreeMap::new() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Stage `bytes` at `rel`, a relative path that stays inside the output root.
    pub fn add(&mut self, rel: &str, bytes: Vec<u8>) -> Result<()> {
        let p = Path::new(rel);
        if rel.is_empty() || !p.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(Error::InvalidArgument(format!("output path '{rel}' escapes the output directory")));
        }
        if self.files.insert(rel.to_string(), bytes).is_some() {
            return Err(Error::InvalidArgument(format!("output '{rel}' staged twice")));
        }
        Ok(())
    }

    pub fn add_str(&mut self, rel: &str, text: String) -> Result<()> {
        self.add(rel, text.into_bytes())
    }

    pub fn contains(&self, rel: &str) -> bool {
        self.files.contains_key(rel)
    }

    /// `(path, sha256)` of every staged file, sorted by path.
    pub fn hashes(&self) -> Vec<(String, String)> {
        self.files.iter().map(|(p, b)| (p.clone(), sha256_hex(b))).collect()
    }

    /// Write everything under the root. Each file goes to a temporary name
    /// first and is renamed into place.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, bytes) in self.files {
            let path = self.root.join(&rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            let mut tmp = path.clone().into_os_string();
            tmp.push(".partial");
            std::fs::write(&tmp, &bytes)?;
            std::fs::rename(&tmp, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// CSV text from a header and rows.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Shortest round-trip form; NaN becomes an empty field.
pub fn num(v: f64) -> String {
    if v.is_nan() { String::new() } else { format!("{v}") }
}

/// Rounded to `digits` decimals; NaN becomes an empty field.
pub fn rounded(v: f64, digits: usize) -> String {
    if v.is_nan() { String::new() } else { format!("{v:.digits$}") }
}
