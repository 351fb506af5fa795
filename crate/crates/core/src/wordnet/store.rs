//! JSON snapshot of an edited tree, passed between pipeline stages.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Synset, SynsetId, SynsetTree};
use crate::error::{Error, Result};

const FORMAT: &str = "saliency-ontology/1";

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    synsets: Vec<StoredSynset>,
    lemma_index: BTreeMap<String, Vec<String>>,
    exceptions: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct StoredSynset {
    key: String,
    offset: u64,
    lemmas: Vec<String>,
    gloss: String,
    hypernyms: Vec<String>,
}

impl SynsetTree {
    pub fn to_json(&self) -> String {
        let snapshot = Snapshot {
            format: FORMAT.to_string(),
            synsets: self
                .synsets()
                .map(|s| StoredSynset {
                    key: s.id.lemma_key().to_string(),
                    offset: s.id.offset(),
                    lemmas: s.lemmas.clone(),
                    gloss: s.gloss.clone(),
                    hypernyms: s.hypernyms.iter().map(|h| h.lemma_key().to_string()).collect(),
                })
                .collect(),
            lemma_index: self
                .lemma_index
                .iter()
                .map(|(l, ids)| (l.clone(), ids.iter().map(|i| i.lemma_key().to_string()).collect()))
                .collect(),
            exceptions: self.exceptions.clone(),
        };
        serde_json::to_string(&snapshot).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<SynsetTree> {
        let snapshot: Snapshot =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("ontology snapshot: {e}")))?;
        if snapshot.format != FORMAT {
            return Err(Error::Invalid(format!(
                "ontology snapshot format `{}`, expected `{FORMAT}`",
                snapshot.format
            )));
        }
        let ids: BTreeMap<&str, SynsetId> = snapshot
            .synsets
            .iter()
            .map(|s| (s.key.as_str(), SynsetId::new(&s.key, s.offset)))
            .collect();
        let resolve = |key: &str| {
            ids.get(key)
                .cloned()
                .ok_or_else(|| Error::Integrity(format!("snapshot references missing synset {key}")))
        };
        let lemma_index = snapshot
            .lemma_index
            .iter()
            .map(|(l, keys)| Ok((l.clone(), keys.iter().map(|k| resolve(k)).collect::<Result<_>>()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let synsets = snapshot
            .synsets
            .iter()
            .map(|s| {
                Ok(Synset {
                    id: resolve(&s.key)?,
                    lemmas: s.lemmas.clone(),
                    gloss: s.gloss.clone(),
                    hypernyms: s.hypernyms.iter().map(|k| resolve(k)).collect::<Result<_>>()?,
                    hyponyms: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SynsetTree::from_parts(synsets, lemma_index, snapshot.exceptions)
    }
}

pub fn write_ontology(tree: &SynsetTree, path: &Path) -> Result<()> {
    fs::write(path, tree.to_json() + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_ontology(path: &Path) -> Result<SynsetTree> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SynsetTree::from_json(&text)
}
