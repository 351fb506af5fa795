//! Inputs shared by the benchmarks.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saliency_core::analytics::SaliencyTensor;
use saliency_core::ingest::{join_captions, parse_captions, parse_conllu, TaggedCaption};
use saliency_core::stats::DistanceMatrix;
use saliency_core::wordnet::{parse_edit_script, parse_wordnet_dir, DEFAULT_EDIT_SCRIPT};
use saliency_core::{SynsetId, SynsetInventory, SynsetTree};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Full WordNet when `WORDNET_DIR` is set, else the fixture database.
pub fn wordnet_dir() -> PathBuf {
    std::env::var_os("WORDNET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures().join("wordnet"))
}

pub fn edited_tree() -> SynsetTree {
    parse_wordnet_dir(&fixtures().join("wordnet"))
        .and_then(|t| t.apply_edits(&parse_edit_script(DEFAULT_EDIT_SCRIPT).unwrap()))
        .expect("fixture ontology")
}

pub fn fixture_inventory(tree: &SynsetTree) -> SynsetInventory {
    let text = std::fs::read_to_string(fixtures().join("corpus/expected/inventory.tsv")).unwrap();
    SynsetInventory::from_tsv(tree, &text).unwrap()
}

/// The fixture captions repeated `copies` times under distinct image ids.
pub fn tagged_corpus(copies: usize) -> Vec<TaggedCaption> {
    let dir = fixtures().join("corpus");
    let captions = std::fs::read_to_string(dir.join("captions.jsonl")).unwrap();
    let conllu = std::fs::read_to_string(dir.join("tagged.conllu")).unwrap();
    let mut out = Vec::new();
    for c in 0..copies {
        let captions = captions.replace("\"img", &format!("\"c{c}img"));
        let conllu = conllu.replace("= img", &format!("= c{c}img"));
        let records = parse_captions(&captions).records;
        let (joined, _) = join_captions(parse_conllu(&conllu).records, &records);
        out.extend(joined);
    }
    out
}

pub fn random_tensor(languages: usize, entities: usize, images: usize, seed: u64) -> SaliencyTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let captions: Vec<u32> = (0..languages * images).map(|_| rng.random_range(0..4)).collect();
    let mut mentions = Vec::with_capacity(languages * entities * images);
    for l in 0..languages {
        for _ in 0..entities {
            for i in 0..images {
                mentions.push(rng.random_range(0..=captions[l * images + i]));
            }
        }
    }
    SaliencyTensor::from_counts(
        (0..languages).map(|l| format!("l{l}")).collect(),
        (0..entities)
            .map(|o| SynsetId::new(format!("e{o}.n.01"), o as u64 + 1))
            .collect(),
        (0..images).map(|i| format!("i{i}")).collect(),
        captions,
        mentions,
    )
    .unwrap()
}

/// A random Euclidean distance matrix over points in the plane.
pub fn random_matrix(n: usize, seed: u64) -> DistanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let rows = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    DistanceMatrix::new((0..n).map(|i| format!("l{i}")).collect(), rows).unwrap()
}
