//! Per-stage manifests.
//!
//! Every stage writes `<stage>.manifest.json` next to its artifacts with the
//! SHA-256 of each file it read and wrote, the config hash and the toolkit
//! version. Stages check upstream artifacts against the producer's manifest
//! before using them, and `report` re-verifies every manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// A file named in the config.
    Config,
    /// An artifact in the output directory.
    Artifact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub source: Source,
    pub path: String,
    pub sha256: String,
    /// Stage that produced an artifact input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub producer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub toolkit_version: String,
    pub config_hash: String,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: BTreeMap<String, FileRecord>,
    pub outputs: BTreeMap<String, FileRecord>,
    pub notes: BTreeMap<String, Value>,
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(out_dir: &Path, stage: &str) -> PathBuf {
    out_dir.join(format!("{}.manifest.json", stage.replace(' ', "-")))
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Core(saliency_core::Error::Parse {
            file: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    })
}

/// Bookkeeping for one stage run.
pub struct Stage<'a> {
    pub config: &'a PipelineConfig,
    manifest: Manifest,
}

impl<'a> Stage<'a> {
    pub fn new(name: &str, config: &'a PipelineConfig) -> Self {
        Self {
            config,
            manifest: Manifest {
                stage: name.to_string(),
                toolkit_version: VERSION.to_string(),
                config_hash: config.hash(),
                parameters: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                notes: BTreeMap::new(),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.manifest.stage
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.manifest.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.manifest.notes.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    /// Reads and records a file named in the config.
    pub fn input(&mut self, name: &str, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.manifest.inputs.insert(
            name.to_string(),
            FileRecord {
                source: Source::Config,
                path: path.display().to_string(),
                sha256: sha256(&bytes),
                producer: None,
            },
        );
        into_text(path, bytes)
    }

    /// Reads an upstream artifact after checking it against its producer's
    /// manifest.
    pub fn artifact(&mut self, name: &str, producer: &str) -> Result<String, CliError> {
        let path = self.out_dir().join(name);
        if !path.exists() {
            return Err(CliError::MissingArtifact {
                artifact: path,
                producer: producer.to_string(),
            });
        }
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let hash = sha256(&bytes);
        let stale = || CliError::Stale {
            artifact: path.clone(),
            producer: producer.to_string(),
        };
        let mpath = manifest_path(self.out_dir(), producer);
        if !mpath.exists() {
            return Err(stale());
        }
        let recorded = read_manifest(&mpath)?;
        if recorded.outputs.get(name).map(|r| r.sha256.as_str()) != Some(hash.as_str()) {
            return Err(stale());
        }
        self.manifest.inputs.insert(
            name.to_string(),
            FileRecord {
                source: Source::Artifact,
                path: name.to_string(),
                sha256: hash,
                producer: Some(producer.to_string()),
            },
        );
        into_text(&path, bytes)
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let dir = self.out_dir();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.insert(
            name.to_string(),
            FileRecord {
                source: Source::Artifact,
                path: name.to_string(),
                sha256: sha256(content.as_bytes()),
                producer: None,
            },
        );
        log::info!("{}: wrote {}", self.name(), path.display());
        Ok(())
    }

    /// Writes the manifest, reporting inputs that changed since the previous
    /// run of this stage.
    pub fn finish(self) -> Result<Manifest, CliError> {
        let path = manifest_path(self.out_dir(), self.name());
        if path.exists() {
            if let Ok(previous) = read_manifest(&path) {
                for (name, record) in &self.manifest.inputs {
                    match previous.inputs.get(name) {
                        Some(old) if old.sha256 != record.sha256 => {
                            log::warn!("{}: input {name} changed since the previous run", self.name())
                        }
                        None => log::warn!("{}: new input {name} since the previous run", self.name()),
                        _ => {}
                    }
                }
                if previous.config_hash != self.manifest.config_hash {
                    log::warn!("{}: configuration changed since the previous run", self.name());
                }
            }
        }
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}

fn into_text(path: &Path, bytes: Vec<u8>) -> Result<String, CliError> {
    String::from_utf8(bytes).map_err(|_| {
        CliError::Core(saliency_core::Error::Parse {
            file: path.to_path_buf(),
            line: 0,
            message: "not valid UTF-8".into(),
        })
    })
}

/// A recorded file whose current content differs from its manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub stage: String,
    pub file: String,
    pub kind: &'static str,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} of `saliency {}` has changed; re-run `saliency {}`",
            self.kind, self.file, self.stage, self.stage
        )
    }
}

/// Re-hashes every file a manifest recorded.
pub fn verify(manifest: &Manifest, out_dir: &Path) -> Vec<Mismatch> {
    let mut out = Vec::new();
    let sides = [("input", &manifest.inputs), ("output", &manifest.outputs)];
    for (kind, records) in sides {
        for (name, r) in records {
            let path = match r.source {
                Source::Config => PathBuf::from(&r.path),
                Source::Artifact => out_dir.join(&r.path),
            };
            let current = fs::read(&path).ok().map(|b| sha256(&b));
            if current.as_deref() != Some(r.sha256.as_str()) {
                out.push(Mismatch {
                    stage: manifest.stage.clone(),
                    file: name.clone(),
                    kind,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn stage_names_map_to_files() {
        assert_eq!(
            manifest_path(Path::new("out"), "analyze saliency"),
            PathBuf::from("out/analyze-saliency.manifest.json")
        );
    }
}
