//! Output bundles: deterministic CSV/JSON emission with a checksum manifest.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so a rerun
//! with the same configuration produces byte-identical data files. Every CSV
//! starts with a `# manifest:` comment tying it to the emitting tool and the
//! configuration hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One emitted file with its checksum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

/// Manifest written alongside every bundle as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub tool_version: String,
    /// Canonical key = value rendering of the run configuration.
    pub config: String,
    pub files: Vec<FileEntry>,
}

/// A written output directory.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

/// The `# manifest:` header line of every CSV.
pub fn csv_header_comment(config_text: &str) -> String {
    format!(
        "# manifest: tool_version={TOOL_VERSION} config_sha256={}\n",
        sha256_hex(config_text.as_bytes())
    )
}

/// Write `files` (name → content) plus `manifest.json` into `dir`.
pub fn write_bundle(
    dir: &Path,
    config_text: &str,
    files: Vec<(String, Vec<u8>)>,
) -> Result<OutputBundle, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let mut entries = Vec::with_capacity(files.len());
    for (name, content) in &files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(path.display().to_string(), e))?;
        entries.push(FileEntry {
            name: name.clone(),
            sha256: sha256_hex(content),
        });
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = Manifest {
        tool_version: TOOL_VERSION.to_string(),
        config: config_text.to_string(),
        files: entries,
    };
    let manifest_path = dir.join("manifest.json");
    let rendered =
        serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    fs::write(&manifest_path, rendered.as_bytes())
        .map_err(|e| CliError::io(manifest_path.display().to_string(), e))?;
    Ok(OutputBundle {
        dir: dir.to_path_buf(),
        manifest,
    })
}

/// Re-read a bundle directory and verify every manifest entry: present files,
/// matching checksums.
pub fn self_verify(dir: &Path) -> Result<Vec<String>, CliError> {
    let manifest_path = dir.join("manifest.json");
    let raw = fs::read_to_string(&manifest_path)
        .map_err(|e| CliError::io(manifest_path.display().to_string(), e))?;
    let manifest: Manifest = serde_json::from_str(&raw)
        .map_err(|e| CliError::validation(format!("manifest.json is not valid: {e}")))?;
    let mut report = Vec::new();
    let mut failures = Vec::new();
    for entry in &manifest.files {
        let path = dir.join(&entry.name);
        match fs::read(&path) {
            Ok(bytes) => {
                let got = sha256_hex(&bytes);
                if got == entry.sha256 {
                    report.push(format!("ok        {}", entry.name));
                } else {
                    failures.push(format!("checksum mismatch on {}", entry.name));
                    report.push(format!("MISMATCH  {}", entry.name));
                }
            }
            Err(_) => {
                failures.push(format!("missing file {}", entry.name));
                report.push(format!("MISSING   {}", entry.name));
            }
        }
    }
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::validation(failures.join("; ")))
    }
}

/// Format a float with shortest round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn shortest_round_trip_floats() {
        for x in [0.1, 1.0 / 3.0, 62.831853, -1e-12, 958.8979] {
            let printed = fmt_f64(x);
            assert_eq!(printed.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn bundle_write_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![
            ("a.csv".to_string(), b"x,y\n1,2\n".to_vec()),
            ("b.csv".to_string(), b"z\n3\n".to_vec()),
        ];
        let bundle = write_bundle(dir.path(), "omega = 1\n", files).unwrap();
        assert_eq!(bundle.manifest.files.len(), 2);
        let report = self_verify(dir.path()).unwrap();
        assert_eq!(report.len(), 2);

        // corrupt one file: verification must fail
        fs::write(dir.path().join("a.csv"), b"tampered").unwrap();
        let err = self_verify(dir.path()).unwrap_err();
        assert!(err.to_string().contains("a.csv"));

        // remove it: also a failure
        fs::remove_file(dir.path().join("a.csv")).unwrap();
        let err = self_verify(dir.path()).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }
}
