//! Output directory bookkeeping: every file written through [`OutputDir`] is
//! hashed and listed in `run_manifest.json`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    files: &'a [FileRecord],
    /// Hash over the sorted `path sha256` lines of all files.
    content_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::io(self.root.join(name), std::io::Error::other(e)))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::io(self.root.join(name), std::io::Error::other(e.to_string())))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes the manifest and returns the file records.
    pub fn finish(mut self, config: &ExperimentConfig) -> Result<Vec<FileRecord>> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let listing: String = self.files.iter().map(|f| format!("{} {}\n", f.path, f.sha256)).collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            files: &self.files,
            content_hash: sha256_hex(listing.as_bytes()),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Kind;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: usize,
    }

    #[test]
    fn manifest_lists_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("x")).unwrap();
        out.write_csv("t.csv", &[Row { a: 0.5, b: 1 }, Row { a: 1e-20, b: 2 }]).unwrap();
        out.write_json("s.json", &serde_json::json!({"k": 1})).unwrap();
        let files = out.finish(&ExperimentConfig::new(Kind::GTable)).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read(dir.path().join("x/t.csv")).unwrap();
        assert_eq!(String::from_utf8_lossy(&csv), "a,b\n0.5,1\n1e-20,2\n");
        assert_eq!(files[1].sha256, sha256_hex(&csv));
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("x").join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(manifest["files"].as_array().unwrap().len(), 2);
        assert_eq!(manifest["config"]["kind"], "g_table");
    }
}
