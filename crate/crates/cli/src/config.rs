//! Pipeline configuration.
//!
//! The config file holds one `key = value` pair per line; `#` starts a
//! comment. Relative paths are resolved against the directory of the file.
//! Command-line overrides (`--set key=value` and the dedicated flags) win
//! over file values; relative paths given on the command line resolve
//! against the working directory.
//!
//! | key                  | meaning                                         | default        |
//! |----------------------|-------------------------------------------------|----------------|
//! | `wordnet_dir`        | directory with `index.noun`, `data.noun`, `noun.exc` | required  |
//! | `edit_script`        | ontology edit script, or `none`                 | built-in edits |
//! | `captions`           | caption JSONL                                   |                |
//! | `tagged`             | CoNLL-U tagging of the English captions         |                |
//! | `presence`           | root presence JSONL                             |                |
//! | `gold`               | gold synset JSONL                               |                |
//! | `images`             | image locale JSONL                              |                |
//! | `roots`              | root candidate list                             | built-in list  |
//! | `typology`           | comma-separated distance matrix CSVs            |                |
//! | `output_dir`         | artifact directory                              | `out`          |
//! | `root_min_count`     | instantiations needed by a root                 | 100            |
//! | `explicit_min_count` | mappings needed by an explicit synset           | 100            |
//! | `exclude_languages`  | comma-separated language codes                  | empty          |
//! | `scorer`             | `fallback` or the scoring service URL           | `fallback`     |
//! | `scorer_timeout`     | seconds per scoring request                     | 30             |
//! | `missing_presence`   | `error` or `pass-through`                       | `error`        |
//! | `seed`               | permutation seed, positive                      | 7              |
//! | `permutations`       | Mantel permutations, positive                   | 9999           |
//! | `alpha`              | family-wise significance level                  | 0.05           |
//! | `exact_cutoff`       | largest n for the exact Wilcoxon test           | 25             |
//! | `spread_weighting`   | `languages` or `cells`                          | `languages`    |
//! | `depth_window`       | central depth window, `lo-hi`                   | `5-10`         |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use saliency_core::analytics::SpreadWeighting;
use saliency_core::filtering::MissingPresence;
use saliency_core::stats::{DEFAULT_EXACT_CUTOFF, DEFAULT_PERMUTATIONS};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const PATH_KEYS: [&str; 10] = [
    "wordnet_dir",
    "edit_script",
    "captions",
    "tagged",
    "presence",
    "gold",
    "images",
    "roots",
    "typology",
    "output_dir",
];

const OTHER_KEYS: [&str; 13] = [
    "root_min_count",
    "explicit_min_count",
    "exclude_languages",
    "scorer",
    "scorer_timeout",
    "missing_presence",
    "seed",
    "permutations",
    "alpha",
    "exact_cutoff",
    "spread_weighting",
    "depth_window",
    "jobs",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Fallback,
    Remote(String),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub wordnet_dir: Option<PathBuf>,
    /// `None` applies the built-in edits; `Some(None)` applies none.
    pub edit_script: Option<Option<PathBuf>>,
    pub captions: Option<PathBuf>,
    pub tagged: Option<PathBuf>,
    pub presence: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub roots: Option<PathBuf>,
    pub typology: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub root_min_count: u64,
    pub explicit_min_count: u64,
    pub exclude_languages: Vec<String>,
    pub scorer: Scorer,
    pub scorer_timeout: u64,
    pub missing_presence: MissingPresence,
    pub seed: u64,
    pub permutations: usize,
    pub alpha: f64,
    pub exact_cutoff: usize,
    pub spread_weighting: SpreadWeighting,
    pub depth_window: (usize, usize),
    /// Resolved values, used for hashing.
    entries: BTreeMap<String, String>,
}

/// Raw `key = value` pairs with the directory relative paths resolve against.
#[derive(Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (String, PathBuf)>,
    errors: Vec<String>,
}

impl RawConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::parse(&text, &base))
    }

    pub fn parse(text: &str, base: &Path) -> Self {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => raw.insert(k.trim(), v.trim(), base, Some(n + 1)),
                None => raw.errors.push(format!("line {}: expected `key = value`", n + 1)),
            }
        }
        raw
    }

    /// Applies a `key=value` override; paths resolve against the working
    /// directory.
    pub fn set(&mut self, assignment: &str) {
        match assignment.split_once('=') {
            Some((k, v)) => self.insert(k.trim(), v.trim(), Path::new(""), None),
            None => self
                .errors
                .push(format!("override `{assignment}`: expected key=value")),
        }
    }

    fn insert(&mut self, key: &str, value: &str, base: &Path, line: Option<usize>) {
        if !PATH_KEYS.contains(&key) && !OTHER_KEYS.contains(&key) {
            let at = line.map_or_else(|| "override".to_string(), |n| format!("line {n}"));
            self.errors.push(format!("{at}: unknown key `{key}`"));
            return;
        }
        self.values
            .insert(key.to_string(), (value.to_string(), base.to_path_buf()));
    }

    /// Validates every value and reports all problems at once.
    pub fn resolve(self) -> Result<PipelineConfig, CliError> {
        let mut errors = self.errors;
        let mut entries = BTreeMap::new();
        let get = |k: &str| self.values.get(k).filter(|(v, _)| !v.is_empty());

        let path = |key: &str, errors: &mut Vec<String>| -> Option<PathBuf> {
            let (v, base) = get(key)?;
            let p = base.join(v);
            if key != "output_dir" && !p.exists() {
                errors.push(format!("{key}: {} does not exist", p.display()));
            }
            Some(p)
        };
        let wordnet_dir = path("wordnet_dir", &mut errors);
        let edit_script = match get("edit_script") {
            Some((v, _)) if v == "none" => Some(None),
            Some(_) => Some(path("edit_script", &mut errors)),
            None => None,
        };
        let captions = path("captions", &mut errors);
        let tagged = path("tagged", &mut errors);
        let presence = path("presence", &mut errors);
        let gold = path("gold", &mut errors);
        let images = path("images", &mut errors);
        let roots = path("roots", &mut errors);
        let output_dir = path("output_dir", &mut errors).unwrap_or_else(|| PathBuf::from("out"));
        let typology: Vec<PathBuf> = get("typology")
            .map(|(v, base)| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| base.join(s))
                    .collect()
            })
            .unwrap_or_default();
        for p in &typology {
            if !p.exists() {
                errors.push(format!("typology: {} does not exist", p.display()));
            }
        }

        fn number<T>(
            values: &BTreeMap<String, (String, PathBuf)>,
            key: &str,
            default: T,
            positive: bool,
            errors: &mut Vec<String>,
        ) -> T
        where
            T: std::str::FromStr + PartialOrd + Default,
        {
            match values.get(key).filter(|(v, _)| !v.is_empty()) {
                None => default,
                Some((v, _)) => match v.parse::<T>() {
                    Ok(n) if positive && n <= T::default() => {
                        errors.push(format!("{key}: must be positive, got {v}"));
                        default
                    }
                    Ok(n) => n,
                    Err(_) => {
                        errors.push(format!("{key}: `{v}` is not a valid number"));
                        default
                    }
                },
            }
        }
        let v = &self.values;
        let root_min_count = number(v, "root_min_count", 100u64, false, &mut errors);
        let explicit_min_count = number(v, "explicit_min_count", 100u64, false, &mut errors);
        let scorer_timeout = number(v, "scorer_timeout", 30u64, true, &mut errors);
        let seed = number(v, "seed", 7u64, true, &mut errors);
        let permutations = number(v, "permutations", DEFAULT_PERMUTATIONS, true, &mut errors);
        let alpha = number(v, "alpha", 0.05f64, true, &mut errors);
        if alpha >= 1.0 || alpha.is_nan() {
            errors.push(format!("alpha: must be below 1, got {alpha}"));
        }
        let exact_cutoff = number(v, "exact_cutoff", DEFAULT_EXACT_CUTOFF, false, &mut errors);

        let exclude_languages = get("exclude_languages")
            .map(|(v, _)| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        let scorer = match get("scorer").map(|(v, _)| v.as_str()) {
            None | Some("fallback") => Scorer::Fallback,
            Some(url) if url.starts_with("http://") || url.starts_with("https://") => {
                Scorer::Remote(url.to_string())
            }
            Some(other) => {
                errors.push(format!(
                    "scorer: expected `fallback` or an http(s) URL, got `{other}`"
                ));
                Scorer::Fallback
            }
        };
        let missing_presence = match get("missing_presence").map(|(v, _)| v.as_str()) {
            None | Some("error") => MissingPresence::Error,
            Some("pass-through") => MissingPresence::PassThrough,
            Some(other) => {
                errors.push(format!(
                    "missing_presence: expected `error` or `pass-through`, got `{other}`"
                ));
                MissingPresence::Error
            }
        };
        let spread_weighting = match get("spread_weighting") {
            None => SpreadWeighting::default(),
            Some((s, _)) => s.parse().unwrap_or_else(|e| {
                errors.push(format!("spread_weighting: {e}"));
                SpreadWeighting::default()
            }),
        };
        let depth_window = match get("depth_window") {
            None => (5, 10),
            Some((s, _)) => match s
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            {
                Some((lo, hi)) if lo <= hi => (lo, hi),
                _ => {
                    errors.push(format!("depth_window: expected `lo-hi`, got `{s}`"));
                    (5, 10)
                }
            },
        };
        if let Some((j, _)) = get("jobs") {
            if j.parse::<usize>().map_or(true, |n| n == 0) {
                errors.push(format!("jobs: must be a positive integer, got `{j}`"));
            }
        }

        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        for (k, (value, base)) in &self.values {
            if k == "output_dir" || k == "jobs" {
                continue;
            }
            let resolved = if PATH_KEYS.contains(&k.as_str()) && !value.is_empty() && value != "none" {
                value
                    .split(',')
                    .map(|p| base.join(p.trim()).display().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                value.clone()
            };
            entries.insert(k.clone(), resolved);
        }
        Ok(PipelineConfig {
            wordnet_dir,
            edit_script,
            captions,
            tagged,
            presence,
            gold,
            images,
            roots,
            typology,
            output_dir,
            root_min_count,
            explicit_min_count,
            exclude_languages,
            scorer,
            scorer_timeout,
            missing_presence,
            seed,
            permutations,
            alpha,
            exact_cutoff,
            spread_weighting,
            depth_window,
            entries,
        })
    }

    pub fn jobs(&self) -> Option<usize> {
        self.values.get("jobs").and_then(|(v, _)| v.parse().ok())
    }
}

impl PipelineConfig {
    /// SHA-256 over the resolved settings. The output directory and worker
    /// count do not affect results and are left out.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(format!("{k}={v}\n"));
        }
        hex::encode(h.finalize())
    }
}
