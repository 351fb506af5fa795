//! Declarative ontology edits.
//!
//! Script lines are `remove <synset>`, `unify <subject> <target>` or
//! `relocate <subject> <target>`; `#` starts a comment. Edits run top to
//! bottom against the tree as it stands after the previous edit.

use std::fmt;
use std::fs;
use std::path::Path;

use super::{SynsetId, SynsetTree};
use crate::error::{Error, Result};

/// The edit script shipped with the toolkit.
pub const DEFAULT_EDIT_SCRIPT: &str = "\
# Senses never used to describe images.
remove snake.n.02
# Food as one category.
unify food.n.02 food.n.01
# Couples count as persons.
relocate couple.n.01 person.n.01
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    /// Delete a sense; its hyponyms move up to its hypernyms.
    RemoveSense,
    /// Merge the subject into the target.
    Unify,
    /// Make the target the subject's only hypernym.
    Relocate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyEdit {
    pub kind: EditKind,
    pub subject: String,
    pub target: Option<String>,
    /// 1-based script line, 0 for edits built in code.
    pub line: usize,
}

impl OntologyEdit {
    pub fn remove(subject: &str) -> Self {
        Self::new(EditKind::RemoveSense, subject, None)
    }

    pub fn unify(subject: &str, target: &str) -> Self {
        Self::new(EditKind::Unify, subject, Some(target))
    }

    pub fn relocate(subject: &str, target: &str) -> Self {
        Self::new(EditKind::Relocate, subject, Some(target))
    }

    fn new(kind: EditKind, subject: &str, target: Option<&str>) -> Self {
        Self {
            kind,
            subject: subject.to_string(),
            target: target.map(str::to_string),
            line: 0,
        }
    }

    fn reject(&self, reason: impl Into<String>) -> Error {
        Error::Edit {
            line: self.line,
            edit: self.to_string(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for OntologyEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = match self.kind {
            EditKind::RemoveSense => "remove",
            EditKind::Unify => "unify",
            EditKind::Relocate => "relocate",
        };
        write!(f, "{verb} {}", self.subject)?;
        if let Some(target) = &self.target {
            write!(f, " {target}")?;
        }
        Ok(())
    }
}

pub fn read_edit_script(path: &Path) -> Result<Vec<OntologyEdit>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edit_script(&text).map_err(|(line, message)| Error::parse(path, line, message))
}

/// Parses script text; errors carry the offending line number.
pub fn parse_edit_script(text: &str) -> std::result::Result<Vec<OntologyEdit>, (usize, String)> {
    let mut edits = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let mut edit = match words.as_slice() {
            ["remove", subject] => OntologyEdit::remove(subject),
            ["unify", subject, target] => OntologyEdit::unify(subject, target),
            ["relocate", subject, target] => OntologyEdit::relocate(subject, target),
            _ => return Err((n + 1, format!("unrecognised edit `{line}`"))),
        };
        edit.line = n + 1;
        edits.push(edit);
    }
    Ok(edits)
}

impl SynsetTree {
    /// Applies `edits` in order. The tree is left acyclic and consistent or
    /// an error names the first edit that could not be applied.
    pub fn apply_edits(mut self, edits: &[OntologyEdit]) -> Result<SynsetTree> {
        for edit in edits {
            self.apply_edit(edit)?;
            if !self.is_acyclic() {
                return Err(edit.reject("edit produced a hypernym cycle"));
            }
        }
        self.check_integrity()?;
        Ok(self)
    }

    fn resolve_edit_target(&self, edit: &OntologyEdit, key: &str, what: &str) -> Result<SynsetId> {
        self.by_key(key)
            .map(|s| s.id.clone())
            .ok_or_else(|| edit.reject(format!("{what} `{key}` not found")))
    }

    fn apply_edit(&mut self, edit: &OntologyEdit) -> Result<()> {
        let subject = self.resolve_edit_target(edit, &edit.subject, "subject")?;
        let target = match (&edit.kind, &edit.target) {
            (EditKind::RemoveSense, None) => None,
            (EditKind::RemoveSense, Some(_)) => return Err(edit.reject("remove takes no target")),
            (_, Some(t)) => Some(self.resolve_edit_target(edit, t, "target")?),
            (_, None) => return Err(edit.reject("missing target")),
        };
        if let Some(target) = &target {
            if *target == subject {
                return Err(edit.reject("subject and target are the same synset"));
            }
            if self.is_descendant(target, &subject)? {
                return Err(edit.reject(format!("would create a cycle: {target} descends from {subject}")));
            }
        }
        match edit.kind {
            EditKind::RemoveSense => self.remove_sense(&subject),
            EditKind::Unify => self.unify(&subject, &target.expect("checked above")),
            EditKind::Relocate => self.relocate(&subject, &target.expect("checked above")),
        }
        self.rebuild_hyponyms();
        Ok(())
    }

    fn remove_sense(&mut self, subject: &SynsetId) {
        let removed = self.detach(subject);
        for child in &removed.hyponyms {
            let synset = self.synsets.get_mut(&child.offset).expect("consistent edges");
            let mut hypernyms = Vec::new();
            for h in synset.hypernyms.drain(..) {
                if h == *subject {
                    hypernyms.extend(removed.hypernyms.iter().cloned());
                } else {
                    hypernyms.push(h);
                }
            }
            synset.hypernyms = dedup(hypernyms);
        }
        self.lemma_index.retain(|_, ids| {
            ids.retain(|id| id != subject);
            !ids.is_empty()
        });
    }

    fn unify(&mut self, subject: &SynsetId, target: &SynsetId) {
        let removed = self.detach(subject);
        for child in &removed.hyponyms {
            let synset = self.synsets.get_mut(&child.offset).expect("consistent edges");
            let hypernyms = synset
                .hypernyms
                .drain(..)
                .map(|h| if h == *subject { target.clone() } else { h })
                .collect();
            synset.hypernyms = dedup(hypernyms);
        }
        let merged = self.synsets.get_mut(&target.offset).expect("resolved target");
        for lemma in removed.lemmas {
            if !merged.lemmas.contains(&lemma) {
                merged.lemmas.push(lemma);
            }
        }
        for ids in self.lemma_index.values_mut() {
            if ids.contains(subject) {
                let replaced = ids
                    .drain(..)
                    .map(|id| if id == *subject { target.clone() } else { id })
                    .collect();
                *ids = dedup(replaced);
            }
        }
    }

    fn relocate(&mut self, subject: &SynsetId, target: &SynsetId) {
        let synset = self.synsets.get_mut(&subject.offset).expect("resolved subject");
        synset.hypernyms = vec![target.clone()];
    }

    fn detach(&mut self, id: &SynsetId) -> super::Synset {
        self.keys.remove(id.lemma_key());
        self.synsets.remove(&id.offset).expect("resolved subject")
    }
}

fn dedup(ids: Vec<SynsetId>) -> Vec<SynsetId> {
    let mut out: Vec<SynsetId> = Vec::with_capacity(ids.len());
    for id in ids {
        if !out.contains(&id) {
            out.push(id);
        }
    }
    out
}
