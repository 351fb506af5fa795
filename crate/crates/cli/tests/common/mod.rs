#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn corpus() -> PathBuf {
    root().join("fixtures/corpus")
}

pub fn config() -> PathBuf {
    corpus().join("pipeline.conf")
}

/// Every subcommand in pipeline order.
pub const PIPELINE: &[&[&str]] = &[
    &["build-ontology"],
    &["select-inventory"],
    &["extract"],
    &["filter"],
    &["validate"],
    &["analyze", "saliency"],
    &["analyze", "mantel"],
    &["analyze", "compare", "ja", "en", "--entities", "all"],
    &["analyze", "granularity"],
    &["analyze", "counts"],
    &["report"],
];

pub fn saliency(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saliency"))
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

/// Runs one stage and returns its stderr, failing on a non-zero exit.
pub fn stage(config: &Path, out: &Path, args: &[&str]) -> Result<String, String> {
    let o = saliency(config, out, args);
    let stderr = String::from_utf8_lossy(&o.stderr).into_owned();
    if o.status.success() {
        Ok(stderr)
    } else {
        Err(format!(
            "`saliency {}` exited {:?}: {stderr}",
            args.join(" "),
            o.status.code()
        ))
    }
}

pub fn run_pipeline(config: &Path, out: &Path, extra: &[&str]) -> Result<(), String> {
    for args in PIPELINE {
        let mut all: Vec<&str> = extra.to_vec();
        all.extend_from_slice(args);
        stage(config, out, &all)?;
    }
    Ok(())
}

/// File name to content for every file in a directory.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

pub fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

/// Rows of a headed CSV as column-name maps.
pub fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}
