//! Reader for the WordNet 3.0 `wndb` noun files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::{Synset, SynsetId, SynsetTree};
use crate::error::{Error, Result};

/// Loads `index.noun`, `data.noun` and `noun.exc` from a WordNet `dict`
/// directory.
pub fn parse_wordnet_dir(dir: &Path) -> Result<SynsetTree> {
    parse_wordnet(
        &dir.join("index.noun"),
        &dir.join("data.noun"),
        &dir.join("noun.exc"),
    )
}

pub fn parse_wordnet(index_file: &Path, data_file: &Path, exceptions_file: &Path) -> Result<SynsetTree> {
    let data = read(data_file)?;
    let index = read(index_file)?;
    let exc = read(exceptions_file)?;

    let raw = parse_data(data_file, &data)?;
    let lemma_offsets = parse_index(index_file, &index)?;
    let exceptions = parse_exceptions(exceptions_file, &exc)?;

    // Keys come from the position of the synset in its first lemma's
    // index entry.
    let mut ids: HashMap<u64, SynsetId> = HashMap::with_capacity(raw.len());
    for record in &raw {
        let first = record.words[0].to_lowercase();
        let offsets = lemma_offsets.get(&first).ok_or_else(|| {
            Error::Integrity(format!(
                "synset {:08} has lemma `{first}` missing from index.noun",
                record.offset
            ))
        })?;
        let sense = offsets.iter().position(|o| *o == record.offset).ok_or_else(|| {
            Error::Integrity(format!(
                "index.noun entry `{first}` does not list synset {:08}",
                record.offset
            ))
        })?;
        ids.insert(
            record.offset,
            SynsetId::new(format!("{first}.n.{:02}", sense + 1), record.offset),
        );
    }

    let resolve = |offset: u64, context: &str| {
        ids.get(&offset)
            .cloned()
            .ok_or_else(|| Error::Integrity(format!("dangling pointer to {offset:08} in {context}")))
    };

    let mut lemma_index = BTreeMap::new();
    for (lemma, offsets) in &lemma_offsets {
        let list = offsets
            .iter()
            .map(|o| resolve(*o, &format!("index.noun entry `{lemma}`")))
            .collect::<Result<Vec<_>>>()?;
        lemma_index.insert(lemma.clone(), list);
    }

    let mut synsets = Vec::with_capacity(raw.len());
    for record in raw {
        let context = format!("data.noun synset {:08}", record.offset);
        let hypernyms = record
            .hypernyms
            .iter()
            .map(|o| resolve(*o, &context))
            .collect::<Result<Vec<_>>>()?;
        synsets.push(Synset {
            id: ids[&record.offset].clone(),
            lemmas: record.words,
            gloss: record.gloss,
            hypernyms,
            hyponyms: Vec::new(),
        });
    }

    SynsetTree::from_parts(synsets, lemma_index, exceptions)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn is_header(line: &str) -> bool {
    line.starts_with(' ') || line.trim().is_empty()
}

struct RawSynset {
    offset: u64,
    words: Vec<String>,
    hypernyms: Vec<u64>,
    gloss: String,
}

fn parse_data(path: &Path, text: &str) -> Result<Vec<RawSynset>> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let lineno = n + 1;
        let record = parse_data_line(line).map_err(|m| Error::parse(path, lineno, m))?;
        if let Some(prev) = seen.insert(record.offset, lineno) {
            return Err(Error::parse(
                path,
                lineno,
                format!("offset {:08} already defined on line {prev}", record.offset),
            ));
        }
        out.push(record);
    }
    Ok(out)
}

fn parse_data_line(line: &str) -> std::result::Result<RawSynset, String> {
    let (fields, gloss) = match line.split_once(" | ") {
        Some((f, g)) => (f, g.trim_end()),
        None => (line.trim_end_matches('|'), ""),
    };
    let mut tok = fields.split_ascii_whitespace();
    let mut next = |what: &str| tok.next().ok_or_else(|| format!("missing {what}"));

    let offset: u64 = next("synset offset")?
        .parse()
        .map_err(|_| "synset offset is not a number".to_string())?;
    next("lex_filenum")?;
    let ss_type = next("ss_type")?;
    if ss_type != "n" {
        return Err(format!("expected noun ss_type `n`, found `{ss_type}`"));
    }
    let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| "bad w_cnt".to_string())?;
    if w_cnt == 0 {
        return Err("synset without words".into());
    }
    let mut words = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        words.push(next("word")?.to_string());
        next("lex_id")?;
    }
    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| "bad p_cnt".to_string())?;
    let mut hypernyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = next("pointer symbol")?;
        let target: u64 = next("pointer offset")?
            .parse()
            .map_err(|_| "bad pointer offset".to_string())?;
        let pos = next("pointer pos")?;
        next("pointer source/target")?;
        if pos == "n" && (symbol == "@" || symbol == "@i") {
            hypernyms.push(target);
        }
    }
    Ok(RawSynset {
        offset,
        words,
        hypernyms,
        gloss: gloss.to_string(),
    })
}

fn parse_index(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<u64>>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let (lemma, offsets) = parse_index_line(line).map_err(|m| Error::parse(path, n + 1, m))?;
        out.insert(lemma, offsets);
    }
    Ok(out)
}

fn parse_index_line(line: &str) -> std::result::Result<(String, Vec<u64>), String> {
    let mut tok = line.split_ascii_whitespace();
    let mut next = |what: &str| tok.next().ok_or_else(|| format!("missing {what}"));
    let lemma = next("lemma")?.to_lowercase();
    let pos = next("pos")?;
    if pos != "n" {
        return Err(format!("expected pos `n`, found `{pos}`"));
    }
    let synset_cnt: usize = next("synset_cnt")?
        .parse()
        .map_err(|_| "bad synset_cnt".to_string())?;
    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| "bad p_cnt".to_string())?;
    for _ in 0..p_cnt {
        next("pointer symbol")?;
    }
    next("sense_cnt")?;
    next("tagsense_cnt")?;
    let offsets = (0..synset_cnt)
        .map(|_| {
            next("synset offset")?
                .parse::<u64>()
                .map_err(|_| "bad synset offset".to_string())
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((lemma, offsets))
}

fn parse_exceptions(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if is_header(line) {
            continue;
        }
        let mut tok = line.split_ascii_whitespace();
        let form = tok.next().expect("non-empty line");
        let bases: Vec<String> = tok.map(str::to_string).collect();
        if bases.is_empty() {
            return Err(Error::parse(path, n + 1, "exception without base form"));
        }
        out.entry(form.to_string()).or_default().extend(bases);
    }
    Ok(out)
}
