//! In-memory WordNet noun hierarchy.
//!
//! A [`SynsetTree`] is built from the `wndb` noun files (`index.noun`,
//! `data.noun`, `noun.exc`), optionally edited with an [`OntologyEdit`]
//! script, and then only queried. Synsets are named the usual way
//! (`<first lemma>.n.<sense number>`); names are fixed at parse time and
//! survive edits.

mod edits;
mod morph;
mod parse;
mod store;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use edits::{parse_edit_script, read_edit_script, EditKind, OntologyEdit, DEFAULT_EDIT_SCRIPT};
pub use morph::normalize_phrase;
pub use parse::{parse_wordnet, parse_wordnet_dir};
pub use store::{read_ontology, write_ontology};

/// Identifier of a noun synset: its readable key plus the database offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId {
    lemma_key: String,
    offset: u64,
}

impl SynsetId {
    pub fn new(lemma_key: impl Into<String>, offset: u64) -> Self {
        Self {
            lemma_key: lemma_key.into(),
            offset,
        }
    }

    /// `bank.n.01` style key.
    pub fn lemma_key(&self) -> &str {
        &self.lemma_key
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// The lemma part of the key (`bank` for `bank.n.01`).
    pub fn lemma(&self) -> &str {
        split_key(&self.lemma_key).map_or(&self.lemma_key, |(lemma, _)| lemma)
    }

    /// The sense number encoded in the key (`1` for `bank.n.01`).
    pub fn sense_number(&self) -> u32 {
        split_key(&self.lemma_key).map_or(0, |(_, sense)| sense)
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lemma_key)
    }
}

impl Serialize for SynsetId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.lemma_key)
    }
}

fn split_key(key: &str) -> Option<(&str, u32)> {
    let (rest, sense) = key.rsplit_once('.')?;
    let lemma = rest.strip_suffix(".n")?;
    Some((lemma, sense.parse().ok()?))
}

/// Whether `key` has the `<lemma>.n.<two or more digits>` shape.
pub fn is_valid_lemma_key(key: &str) -> bool {
    match key.rsplit_once('.') {
        Some((rest, sense)) => {
            sense.len() >= 2
                && sense.bytes().all(|b| b.is_ascii_digit())
                && rest.strip_suffix(".n").is_some_and(|l| !l.is_empty())
        }
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    /// Lemmas as stored in the database, multiwords joined with `_`.
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub hypernyms: Vec<SynsetId>,
    pub hyponyms: Vec<SynsetId>,
}

impl Synset {
    /// First lemma with underscores turned back into spaces.
    pub fn display_name(&self) -> String {
        self.lemmas
            .first()
            .map_or_else(|| self.id.lemma().to_string(), |l| l.replace('_', " "))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynsetTree {
    synsets: HashMap<u64, Synset>,
    keys: HashMap<String, u64>,
    lemma_index: BTreeMap<String, Vec<SynsetId>>,
    exceptions: BTreeMap<String, Vec<String>>,
}

impl SynsetTree {
    pub(crate) fn from_parts(
        synsets: Vec<Synset>,
        lemma_index: BTreeMap<String, Vec<SynsetId>>,
        exceptions: BTreeMap<String, Vec<String>>,
    ) -> Result<Self> {
        let mut tree = SynsetTree {
            synsets: HashMap::with_capacity(synsets.len()),
            keys: HashMap::with_capacity(synsets.len()),
            lemma_index,
            exceptions,
        };
        for synset in synsets {
            let offset = synset.id.offset;
            if tree.keys.insert(synset.id.lemma_key.clone(), offset).is_some() {
                return Err(Error::Integrity(format!("duplicate synset key {}", synset.id)));
            }
            if tree.synsets.insert(offset, synset).is_some() {
                return Err(Error::Integrity(format!("duplicate synset offset {offset:08}")));
            }
        }
        tree.rebuild_hyponyms();
        tree.check_integrity()?;
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn get(&self, id: &SynsetId) -> Option<&Synset> {
        self.synsets.get(&id.offset).filter(|s| s.id == *id)
    }

    pub fn by_offset(&self, offset: u64) -> Option<&Synset> {
        self.synsets.get(&offset)
    }

    /// Resolves a `bank.n.01` style key.
    pub fn by_key(&self, key: &str) -> Option<&Synset> {
        self.keys.get(key).and_then(|o| self.synsets.get(o))
    }

    pub fn id(&self, key: &str) -> Result<SynsetId> {
        self.by_key(key)
            .map(|s| s.id.clone())
            .ok_or_else(|| Error::UnknownSynset(key.to_string()))
    }

    pub fn contains(&self, id: &SynsetId) -> bool {
        self.get(id).is_some()
    }

    /// All synsets in ascending offset order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        let mut offsets: Vec<u64> = self.synsets.keys().copied().collect();
        offsets.sort_unstable();
        offsets.into_iter().map(move |o| &self.synsets[&o])
    }

    pub fn lemma_index(&self) -> &BTreeMap<String, Vec<SynsetId>> {
        &self.lemma_index
    }

    pub fn exceptions(&self) -> &BTreeMap<String, Vec<String>> {
        &self.exceptions
    }

    fn synset(&self, id: &SynsetId) -> Result<&Synset> {
        self.get(id)
            .ok_or_else(|| Error::UnknownSynset(id.lemma_key.clone()))
    }

    /// Candidate synsets for a surface phrase, in sense order.
    pub fn lookup(&self, phrase: &str) -> Vec<SynsetId> {
        let normalized = normalize_phrase(phrase);
        if normalized.is_empty() {
            return Vec::new();
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for form in morph::base_forms(self, &normalized) {
            for id in &self.lemma_index[&form] {
                if seen.insert(id.offset) {
                    out.push(id.clone());
                }
            }
        }
        out
    }

    /// The first-listed hypernym, if any.
    pub fn canonical_hypernym(&self, id: &SynsetId) -> Result<Option<&SynsetId>> {
        Ok(self.synset(id)?.hypernyms.first())
    }

    /// Canonical chain from the top node down to `id`, both ends included.
    pub fn hypernym_path(&self, id: &SynsetId) -> Result<Vec<SynsetId>> {
        let mut path = vec![self.synset(id)?.id.clone()];
        let mut current = self.synset(id)?;
        while let Some(parent) = current.hypernyms.first() {
            current = self.synset(parent)?;
            path.push(current.id.clone());
            if path.len() > self.synsets.len() {
                return Err(Error::Integrity(format!("hypernym cycle through {id}")));
            }
        }
        path.reverse();
        Ok(path)
    }

    pub fn depth(&self, id: &SynsetId) -> Result<usize> {
        Ok(self.hypernym_path(id)?.len() - 1)
    }

    /// Every ancestor reachable through any hypernym edge, breadth first,
    /// without `id` itself.
    pub fn ancestors(&self, id: &SynsetId) -> Result<Vec<SynsetId>> {
        let start = self.synset(id)?;
        let mut seen = HashSet::from([start.id.offset]);
        let mut queue: VecDeque<&SynsetId> = start.hypernyms.iter().collect();
        let mut out = Vec::new();
        while let Some(next) = queue.pop_front() {
            if !seen.insert(next.offset) {
                continue;
            }
            let synset = self.synset(next)?;
            out.push(synset.id.clone());
            queue.extend(synset.hypernyms.iter());
        }
        Ok(out)
    }

    /// True when `ancestor` is a strict ancestor of `id`.
    pub fn is_descendant(&self, id: &SynsetId, ancestor: &SynsetId) -> Result<bool> {
        self.synset(ancestor)?;
        Ok(self.ancestors(id)?.iter().any(|a| a == ancestor))
    }

    /// The member of `roots` found on `id` or its hypernym closure.
    pub fn root_of(&self, id: &SynsetId, roots: &HashSet<SynsetId>) -> Result<Option<SynsetId>> {
        let mut found: Vec<SynsetId> = std::iter::once(self.synset(id)?.id.clone())
            .chain(self.ancestors(id)?)
            .filter(|s| roots.contains(s))
            .collect();
        match found.len() {
            0 => Ok(None),
            1 => Ok(found.pop()),
            _ => {
                found.sort();
                Err(Error::MultipleRoots {
                    synset: id.to_string(),
                    roots: found.iter().map(ToString::to_string).collect(),
                })
            }
        }
    }

    /// Shortest upward path from `id` to `ancestor`, returned top-down with
    /// both ends included. The canonical chain is preferred when it passes
    /// through `ancestor`.
    pub fn path_between(&self, ancestor: &SynsetId, id: &SynsetId) -> Result<Option<Vec<SynsetId>>> {
        let canonical = self.hypernym_path(id)?;
        if let Some(pos) = canonical.iter().position(|s| s == ancestor) {
            return Ok(Some(canonical[pos..].to_vec()));
        }
        let start = self.synset(id)?;
        let mut parent: HashMap<u64, &SynsetId> = HashMap::new();
        let mut seen = HashSet::from([start.id.offset]);
        let mut queue = VecDeque::from([&start.id]);
        while let Some(node) = queue.pop_front() {
            if node == ancestor {
                let mut path = vec![node.clone()];
                let mut cur = node;
                while let Some(child) = parent.get(&cur.offset) {
                    path.push((*child).clone());
                    cur = child;
                }
                return Ok(Some(path));
            }
            for hyper in &self.synset(node)?.hypernyms {
                if seen.insert(hyper.offset) {
                    parent.insert(hyper.offset, node);
                    queue.push_back(hyper);
                }
            }
        }
        Ok(None)
    }

    /// Kahn's algorithm over hypernym edges.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree: HashMap<u64, usize> = self
            .synsets
            .values()
            .map(|s| (s.id.offset, s.hypernyms.len()))
            .collect();
        let mut ready: Vec<u64> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(o, _)| *o)
            .collect();
        let mut visited = 0;
        while let Some(offset) = ready.pop() {
            visited += 1;
            for child in &self.synsets[&offset].hyponyms {
                let d = indegree.get_mut(&child.offset).expect("consistent edges");
                *d -= 1;
                if *d == 0 {
                    ready.push(child.offset);
                }
            }
        }
        visited == self.synsets.len()
    }

    pub(crate) fn rebuild_hyponyms(&mut self) {
        let mut children: HashMap<u64, Vec<SynsetId>> = HashMap::new();
        let mut offsets: Vec<u64> = self.synsets.keys().copied().collect();
        offsets.sort_unstable();
        for offset in &offsets {
            let synset = &self.synsets[offset];
            for hyper in &synset.hypernyms {
                children.entry(hyper.offset).or_default().push(synset.id.clone());
            }
        }
        for (offset, synset) in self.synsets.iter_mut() {
            synset.hyponyms = children.remove(offset).unwrap_or_default();
        }
    }

    /// Checks edge consistency, index references and acyclicity.
    pub fn check_integrity(&self) -> Result<()> {
        for synset in self.synsets.values() {
            for hyper in &synset.hypernyms {
                let parent = self.get(hyper).ok_or_else(|| {
                    Error::Integrity(format!("{} points to missing hypernym {hyper}", synset.id))
                })?;
                if !parent.hyponyms.contains(&synset.id) {
                    return Err(Error::Integrity(format!(
                        "{hyper} does not list {} as a hyponym",
                        synset.id
                    )));
                }
            }
            for hypo in &synset.hyponyms {
                let child = self.get(hypo).ok_or_else(|| {
                    Error::Integrity(format!("{} points to missing hyponym {hypo}", synset.id))
                })?;
                if !child.hypernyms.contains(&synset.id) {
                    return Err(Error::Integrity(format!(
                        "{hypo} does not list {} as a hypernym",
                        synset.id
                    )));
                }
            }
        }
        for (lemma, ids) in &self.lemma_index {
            for id in ids {
                if !self.contains(id) {
                    return Err(Error::Integrity(format!(
                        "lemma `{lemma}` indexes missing synset {id}"
                    )));
                }
            }
        }
        if !self.is_acyclic() {
            return Err(Error::Integrity("hypernym graph contains a cycle".into()));
        }
        Ok(())
    }
}
