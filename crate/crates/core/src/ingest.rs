//! Readers for corpus artifacts.
//!
//! Line-oriented readers never stop at a bad record: they return the
//! accepted records in file order together with a reject list, so that
//! `records + rejects` always accounts for every input record.
//!
//! | file              | layout                                                              |
//! |-------------------|---------------------------------------------------------------------|
//! | `captions.jsonl`  | `{"image_id", "language", "text", "text_en"}`                       |
//! | `tagged.conllu`   | CoNLL-U, `# caption_key = <image_id>\|<language>\|<n>` per sentence |
//! | `presence.jsonl`  | `{"image_id", "roots_present": [synset, ...]}`                      |
//! | `gold.jsonl`      | `{"caption_key", "synsets": [synset, ...]}`                         |
//! | `images.jsonl`    | `{"image_id", "locale"}`                                            |
//! | `distances.csv`   | header of language codes, then the square matrix                    |
//!
//! `<n>` is the 0-based position of the caption among the captions of the
//! same image and language in `captions.jsonl`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::DistanceMatrix;

/// Identifies one caption: image, language and position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaptionKey {
    pub image_id: String,
    pub language: String,
    pub index: usize,
}

impl CaptionKey {
    pub fn new(image_id: impl Into<String>, language: impl Into<String>, index: usize) -> Self {
        Self {
            image_id: image_id.into(),
            language: language.into(),
            index,
        }
    }
}

impl fmt::Display for CaptionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.image_id, self.language, self.index)
    }
}

impl FromStr for CaptionKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split('|').collect();
        match parts.as_slice() {
            [image, lang, n] if !image.is_empty() && !lang.is_empty() => {
                let index = n
                    .parse()
                    .map_err(|_| format!("caption index `{n}` is not a number"))?;
                Ok(CaptionKey::new(*image, *lang, index))
            }
            _ => Err(format!("malformed caption key `{s}`")),
        }
    }
}

impl Serialize for CaptionKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CaptionKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionRecord {
    pub image_id: String,
    pub language: String,
    pub text: String,
    pub text_en: String,
    /// Position among captions of the same image and language.
    pub index: usize,
}

impl CaptionRecord {
    pub fn key(&self) -> CaptionKey {
        CaptionKey::new(&self.image_id, &self.language, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub upos: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCaption {
    pub record: CaptionRecord,
    pub tokens: Vec<Token>,
}

impl TaggedCaption {
    pub fn key(&self) -> CaptionKey {
        self.record.key()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub image_id: String,
    pub locale: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceAnnotation {
    pub image_id: String,
    pub roots_present: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSynsets {
    pub caption_key: CaptionKey,
    pub synsets: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    /// 1-based line where the record starts.
    pub line: usize,
    pub reason: String,
}

/// Accepted records plus the rejected ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested<T> {
    pub records: Vec<T>,
    pub rejects: Vec<Reject>,
}

impl<T> Default for Ingested<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
            rejects: Vec::new(),
        }
    }
}

impl<T> Ingested<T> {
    pub fn total(&self) -> usize {
        self.records.len() + self.rejects.len()
    }

    fn reject(&mut self, line: usize, reason: impl Into<String>) {
        self.rejects.push(Reject {
            line,
            reason: reason.into(),
        });
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn json_lines<T, F>(text: &str, mut accept: F) -> Ingested<T>
where
    F: FnMut(usize, serde_json::Value) -> std::result::Result<T, String>,
{
    let mut out = Ingested::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(line)
            .map_err(|e| format!("invalid JSON: {e}"))
            .and_then(|v| accept(n + 1, v));
        match parsed {
            Ok(record) => out.records.push(record),
            Err(reason) => out.reject(n + 1, reason),
        }
    }
    out
}

fn field<T: for<'de> Deserialize<'de>>(
    value: &serde_json::Value,
    name: &str,
) -> std::result::Result<T, String> {
    let v = value.get(name).ok_or_else(|| format!("missing field `{name}`"))?;
    T::deserialize(v).map_err(|e| format!("field `{name}`: {e}"))
}

pub fn read_captions(path: &Path) -> Result<Ingested<CaptionRecord>> {
    Ok(parse_captions(&read_text(path)?))
}

pub fn parse_captions(text: &str) -> Ingested<CaptionRecord> {
    let mut positions: HashMap<(String, String), usize> = HashMap::new();
    json_lines(text, |_, v| {
        let image_id: String = field(&v, "image_id")?;
        let language: String = field(&v, "language")?;
        let text: String = field(&v, "text")?;
        let text_en: Option<String> = field(&v, "text_en").ok();
        if image_id.is_empty() || language.is_empty() {
            return Err("empty image_id or language".into());
        }
        let text_en = text_en
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| "no English translation (`text_en`)".to_string())?;
        let slot = positions.entry((image_id.clone(), language.clone())).or_default();
        let index = *slot;
        *slot += 1;
        Ok(CaptionRecord {
            image_id,
            language,
            text,
            text_en,
            index,
        })
    })
}

/// Drops records whose language is in `excluded`.
pub fn exclude_languages(records: Vec<CaptionRecord>, excluded: &[String]) -> Vec<CaptionRecord> {
    records
        .into_iter()
        .filter(|r| !excluded.contains(&r.language))
        .collect()
}

pub fn read_conllu(path: &Path) -> Result<Ingested<TaggedCaption>> {
    Ok(parse_conllu(&read_text(path)?))
}

/// Parses CoNLL-U sentences. The caption record is rebuilt from the
/// `caption_key` and `text` comments; [`join_captions`] swaps in the record
/// from the caption file.
pub fn parse_conllu(text: &str) -> Ingested<TaggedCaption> {
    let mut out = Ingested::default();
    let mut lines = text.lines().enumerate().peekable();
    loop {
        while lines.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            lines.next();
        }
        let Some(&(start, _)) = lines.peek() else { break };
        let mut key = None;
        let mut sentence_text = None;
        let mut tokens = Vec::new();
        let mut error = None;
        while let Some((n, line)) = lines.next_if(|(_, l)| !l.trim().is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((name, value)) = comment.split_once('=') {
                    match name.trim() {
                        "caption_key" => key = Some(value.trim().to_string()),
                        "text" => sentence_text = Some(value.trim().to_string()),
                        _ => {}
                    }
                }
                continue;
            }
            if error.is_some() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 10 {
                error = Some(format!(
                    "line {}: expected 10 columns, found {}",
                    n + 1,
                    cols.len()
                ));
                continue;
            }
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            if cols[0].parse::<usize>().is_err() {
                error = Some(format!("line {}: bad token id `{}`", n + 1, cols[0]));
                continue;
            }
            tokens.push(Token {
                surface: cols[1].to_string(),
                upos: cols[3].to_string(),
            });
        }
        let line = start + 1;
        if let Some(reason) = error {
            out.reject(line, reason);
            continue;
        }
        let key: CaptionKey = match key.map(|k| k.parse()) {
            Some(Ok(k)) => k,
            Some(Err(e)) => {
                out.reject(line, e);
                continue;
            }
            None => {
                out.reject(line, "sentence without `# caption_key` comment");
                continue;
            }
        };
        let text_en = sentence_text.unwrap_or_else(|| {
            tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        });
        out.records.push(TaggedCaption {
            record: CaptionRecord {
                image_id: key.image_id,
                language: key.language,
                text: text_en.clone(),
                text_en,
                index: key.index,
            },
            tokens,
        });
    }
    out
}

/// Replaces each tagged sentence's record with the matching caption record.
/// Sentences without a caption (or with a duplicate key) are rejected.
pub fn join_captions(
    tagged: Vec<TaggedCaption>,
    captions: &[CaptionRecord],
) -> (Vec<TaggedCaption>, Vec<(CaptionKey, String)>) {
    let by_key: HashMap<CaptionKey, &CaptionRecord> = captions.iter().map(|c| (c.key(), c)).collect();
    let mut seen = HashSet::new();
    let mut joined = Vec::with_capacity(tagged.len());
    let mut rejects = Vec::new();
    for mut t in tagged {
        let key = t.key();
        if !seen.insert(key.clone()) {
            rejects.push((key, "duplicate tagged sentence".to_string()));
            continue;
        }
        match by_key.get(&key) {
            Some(record) => {
                t.record = (*record).clone();
                joined.push(t);
            }
            None => rejects.push((key, "no caption record for this key".to_string())),
        }
    }
    (joined, rejects)
}

pub fn read_presence(path: &Path) -> Result<Ingested<PresenceAnnotation>> {
    Ok(parse_presence(&read_text(path)?))
}

pub fn parse_presence(text: &str) -> Ingested<PresenceAnnotation> {
    let mut seen = HashSet::new();
    json_lines(text, |_, v| {
        let image_id: String = field(&v, "image_id")?;
        let roots_present: BTreeSet<String> = field(&v, "roots_present")?;
        if !seen.insert(image_id.clone()) {
            return Err(format!("duplicate presence annotation for `{image_id}`"));
        }
        Ok(PresenceAnnotation {
            image_id,
            roots_present,
        })
    })
}

/// Presence annotations keyed by image, with `roots_present` checked against
/// the configured roots.
pub fn presence_map(
    annotations: Ingested<PresenceAnnotation>,
    roots: &BTreeSet<String>,
) -> (BTreeMap<String, BTreeSet<String>>, Vec<Reject>) {
    let mut map = BTreeMap::new();
    let mut rejects = annotations.rejects;
    for a in annotations.records {
        let unknown: Vec<&String> = a.roots_present.difference(roots).collect();
        if unknown.is_empty() {
            map.insert(a.image_id, a.roots_present);
        } else {
            rejects.push(Reject {
                line: 0,
                reason: format!("image `{}` lists non-root synsets {unknown:?}", a.image_id),
            });
        }
    }
    (map, rejects)
}

pub fn read_gold(path: &Path) -> Result<Ingested<GoldSynsets>> {
    Ok(parse_gold(&read_text(path)?))
}

pub fn parse_gold(text: &str) -> Ingested<GoldSynsets> {
    let mut seen = HashSet::new();
    json_lines(text, |_, v| {
        let caption_key: CaptionKey = field(&v, "caption_key")?;
        let synsets: BTreeSet<String> = field(&v, "synsets")?;
        if !seen.insert(caption_key.clone()) {
            return Err(format!("duplicate gold annotation for `{caption_key}`"));
        }
        Ok(GoldSynsets { caption_key, synsets })
    })
}

pub fn read_image_meta(path: &Path) -> Result<Ingested<ImageMeta>> {
    Ok(parse_image_meta(&read_text(path)?))
}

pub fn parse_image_meta(text: &str) -> Ingested<ImageMeta> {
    let mut seen = HashSet::new();
    json_lines(text, |_, v| {
        let image_id: String = field(&v, "image_id")?;
        let locale: String = field(&v, "locale")?;
        if !seen.insert(image_id.clone()) {
            return Err(format!("duplicate image `{image_id}`"));
        }
        Ok(ImageMeta { image_id, locale })
    })
}

pub fn read_distance_matrix(path: &Path) -> Result<DistanceMatrix> {
    parse_distance_matrix(&read_text(path)?).map_err(|(line, message)| Error::parse(path, line, message))
}

/// Reads a CSV distance matrix. Rows may optionally start with their label,
/// in which case the header starts with an empty cell.
pub fn parse_distance_matrix(text: &str) -> std::result::Result<DistanceMatrix, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err((1, e.to_string())),
        None => return Err((1, "empty distance matrix file".into())),
    };
    let labelled_rows = header.get(0).is_some_and(str::is_empty);
    let labels: Vec<String> = header
        .iter()
        .skip(usize::from(labelled_rows))
        .map(str::to_string)
        .collect();
    let mut rows = Vec::with_capacity(labels.len());
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| (line, e.to_string()))?;
        let mut cells = rec.iter();
        if labelled_rows {
            let label = cells.next().unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(label) {
                return Err((line, format!("row label `{label}` out of order")));
            }
        }
        let row = cells
            .map(|c| {
                c.parse::<f64>()
                    .map_err(|_| (line, format!("`{c}` is not a number")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    DistanceMatrix::new(labels, rows).map_err(|e| (1, e.to_string()))
}
