#![allow(dead_code)]

use std::path::PathBuf;

use saliency_core::wordnet::{parse_edit_script, parse_wordnet_dir, DEFAULT_EDIT_SCRIPT};
use saliency_core::SynsetTree;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_tree() -> SynsetTree {
    parse_wordnet_dir(&fixtures().join("wordnet")).expect("fixture parses")
}

pub fn edited_tree() -> SynsetTree {
    let edits = parse_edit_script(DEFAULT_EDIT_SCRIPT).expect("default script parses");
    fixture_tree().apply_edits(&edits).expect("default edits apply")
}

pub fn keys<'a>(ids: impl IntoIterator<Item = &'a saliency_core::SynsetId>) -> Vec<String> {
    ids.into_iter().map(|id| id.lemma_key().to_string()).collect()
}
