//! Output directory, artifact files and the manifest.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const OUT_DIR_ENV: &str = "GAUSSBV_OUT_DIR";

/// A file produced by a command, held in memory until written.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self {
            name: name.into(),
            bytes: text.into_bytes(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut s = serde_json::to_string_pretty(value).expect("report serializes");
        s.push('\n');
        Self::text(name, s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub files: Vec<ManifestEntry>,
}

/// `flag`, else `file`, else `$GAUSSBV_OUT_DIR`, else `.`.
pub fn resolve_out_dir(configured: Option<&str>) -> PathBuf {
    configured
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes the artifacts and `manifest.json` into `dir`; returns the manifest.
pub fn write_all(dir: &Path, artifacts: &[Artifact], command: &str, config_hash: String, seed: Option<u64>) -> anyhow::Result<Manifest> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut files = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, &a.bytes).with_context(|| format!("cannot write {}", path.display()))?;
        files.push(ManifestEntry {
            path: a.name.clone(),
            sha256: hex::encode(Sha256::digest(&a.bytes)),
            bytes: a.bytes.len(),
        });
    }
    let manifest = Manifest {
        tool: "gaussbv",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config_hash,
        seed,
        files,
    };
    let m = Artifact::json("manifest.json", &manifest);
    std::fs::write(dir.join(&m.name), &m.bytes).with_context(|| format!("cannot write manifest in {}", dir.display()))?;
    Ok(manifest)
}

/// `file.csv` → `file.json`.
pub fn sibling(name: &str, ext: &str) -> String {
    let p = Path::new(name);
    p.with_extension(ext).to_string_lossy().into_owned()
}

/// `coarea.csv` → `coarea_levels.csv`.
pub fn suffixed(name: &str, suffix: &str) -> String {
    let p = Path::new(name);
    let stem = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let file = match p.extension() {
        Some(e) => format!("{stem}{suffix}.{}", e.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    p.with_file_name(file).to_string_lossy().into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_hashes_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = [Artifact::text("a.csv", "x,y\n1,2\n".into()), Artifact::text("sub/b.json", "{}\n".into())];
        let m = write_all(dir.path(), &a, "test", "abc".into(), Some(7)).unwrap();
        assert_eq!(m.files.len(), 2);
        let bytes = std::fs::read(dir.path().join("a.csv")).unwrap();
        assert_eq!(m.files[0].sha256, hex::encode(Sha256::digest(&bytes)));
        assert!(dir.path().join("manifest.json").exists());
        assert_eq!(sibling("cost.csv", "json"), "cost.json");
        assert_eq!(suffixed("coarea.csv", "_levels"), "coarea_levels.csv");
    }
}
