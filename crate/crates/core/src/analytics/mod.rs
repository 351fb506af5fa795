//! Saliency analytics over filtered extraction results.
//!
//! The central object is the [`SaliencyTensor`]: for each language `l`,
//! inventory entity `o` and image `i`, the fraction of the image's captions
//! in `l` whose closure contains `o`. Language/image pairs without captions
//! are absent rather than zero and are skipped by every downstream
//! statistic.

mod counts;
mod global;
mod granularity;
pub mod tables;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtering::FilteredResult;
use crate::ingest::{CaptionKey, CaptionRecord};
use crate::inventory::SynsetInventory;
use crate::stats::{mantel, DistanceMatrix, MantelResult};
use crate::wordnet::SynsetId;

pub use counts::{entity_counts, home_abroad_correlation, per_locale_counts, HomeAbroad};
pub use global::{
    compare_languages, global_saliency, saliency_spread, Comparison, GlobalSaliency, SpreadEntry,
    SpreadWeighting,
};
pub use granularity::{depth_histogram, DepthHistogram, DepthSummary};

/// Caption counts per (language, image), taken from the caption file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaptionIndex {
    keys: HashSet<CaptionKey>,
    counts: BTreeMap<(String, String), u32>,
}

impl CaptionIndex {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a CaptionRecord>) -> Self {
        let mut index = CaptionIndex::default();
        for r in records {
            if index.keys.insert(r.key()) {
                *index
                    .counts
                    .entry((r.language.clone(), r.image_id.clone()))
                    .or_default() += 1;
            }
        }
        index
    }

    pub fn contains(&self, key: &CaptionKey) -> bool {
        self.keys.contains(key)
    }

    pub fn count(&self, language: &str, image: &str) -> u32 {
        self.counts
            .get(&(language.to_string(), image.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn languages(&self) -> BTreeSet<String> {
        self.counts.keys().map(|(l, _)| l.clone()).collect()
    }

    pub fn images(&self) -> BTreeSet<String> {
        self.counts.keys().map(|(_, i)| i.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaliencyTensor {
    languages: Vec<String>,
    entities: Vec<SynsetId>,
    images: Vec<String>,
    /// `n_l` per (language, image).
    caption_counts: Vec<u32>,
    /// Captions mentioning the entity, per (language, entity, image).
    mention_counts: Vec<u32>,
}

impl SaliencyTensor {
    /// Builds a tensor from raw counts; `mention_counts` is laid out
    /// language-major, then entity, then image.
    pub fn from_counts(
        languages: Vec<String>,
        entities: Vec<SynsetId>,
        images: Vec<String>,
        caption_counts: Vec<u32>,
        mention_counts: Vec<u32>,
    ) -> Result<Self> {
        let (nl, no, ni) = (languages.len(), entities.len(), images.len());
        if caption_counts.len() != nl * ni || mention_counts.len() != nl * no * ni {
            return Err(Error::Invalid("tensor dimensions do not match the counts".into()));
        }
        for l in 0..nl {
            for o in 0..no {
                for i in 0..ni {
                    if mention_counts[(l * no + o) * ni + i] > caption_counts[l * ni + i] {
                        return Err(Error::Invalid(format!(
                            "more mentions than captions for ({}, {}, {})",
                            languages[l], entities[o], images[i]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            languages,
            entities,
            images,
            caption_counts,
            mention_counts,
        })
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn entities(&self) -> &[SynsetId] {
        &self.entities
    }

    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn language_index(&self, language: &str) -> Result<usize> {
        self.languages
            .iter()
            .position(|l| l == language)
            .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
    }

    pub fn entity_index(&self, entity: &SynsetId) -> Option<usize> {
        self.entities.binary_search(entity).ok()
    }

    /// Number of captions of image `i` in language `l`.
    pub fn caption_count(&self, l: usize, i: usize) -> u32 {
        self.caption_counts[l * self.images.len() + i]
    }

    pub fn mention_count(&self, l: usize, o: usize, i: usize) -> u32 {
        self.mention_counts[(l * self.entities.len() + o) * self.images.len() + i]
    }

    pub fn is_present(&self, l: usize, i: usize) -> bool {
        self.caption_count(l, i) > 0
    }

    /// Saliency of entity `o` in image `i` for language `l`, or `None` when
    /// the image has no captions in that language.
    pub fn value(&self, l: usize, o: usize, i: usize) -> Option<f64> {
        let n = self.caption_count(l, i);
        (n > 0).then(|| f64::from(self.mention_count(l, o, i)) / f64::from(n))
    }
}

/// Builds the saliency tensor. Entities are the inventory members in key
/// order; languages and images are those of the caption index, sorted.
pub fn build_tensor(
    filtered: &[FilteredResult],
    inventory: &SynsetInventory,
    captions: &CaptionIndex,
) -> Result<SaliencyTensor> {
    let languages: Vec<String> = captions.languages().into_iter().collect();
    let images: Vec<String> = captions.images().into_iter().collect();
    let entities: Vec<SynsetId> = inventory.entries().keys().cloned().collect();
    let lang_idx: HashMap<&str, usize> = languages
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let image_idx: HashMap<&str, usize> = images.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let entity_idx: HashMap<&SynsetId, usize> = entities.iter().enumerate().map(|(i, e)| (e, i)).collect();

    let mut seen = HashSet::new();
    for r in filtered {
        if !captions.contains(&r.caption_key) {
            return Err(Error::UnknownCaption(r.caption_key.to_string()));
        }
        if !seen.insert(&r.caption_key) {
            return Err(Error::Invalid(format!(
                "caption {} filtered twice",
                r.caption_key
            )));
        }
    }

    let (nl, no, ni) = (languages.len(), entities.len(), images.len());
    let mention_counts = filtered
        .par_iter()
        .fold(
            || vec![0u32; nl * no * ni],
            |mut acc, r| {
                let l = lang_idx[r.caption_key.language.as_str()];
                let i = image_idx[r.caption_key.image_id.as_str()];
                for s in &r.closure {
                    if let Some(&o) = entity_idx.get(s) {
                        acc[(l * no + o) * ni + i] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; nl * no * ni],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut caption_counts = vec![0u32; nl * ni];
    for (l, lang) in languages.iter().enumerate() {
        for (i, img) in images.iter().enumerate() {
            caption_counts[l * ni + i] = captions.count(lang, img);
        }
    }
    SaliencyTensor::from_counts(languages, entities, images, caption_counts, mention_counts)
}

/// Euclidean distance between two languages' slices over the cells present
/// in both.
pub fn saliency_distance(tensor: &SaliencyTensor, l: &str, k: &str) -> Result<f64> {
    let a = tensor.language_index(l)?;
    let b = tensor.language_index(k)?;
    Ok(slice_distance(tensor, a, b))
}

fn slice_distance(tensor: &SaliencyTensor, a: usize, b: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..tensor.images.len() {
        let (na, nb) = (tensor.caption_count(a, i), tensor.caption_count(b, i));
        if na == 0 || nb == 0 {
            continue;
        }
        for o in 0..tensor.entities.len() {
            let d = f64::from(tensor.mention_count(a, o, i)) / f64::from(na)
                - f64::from(tensor.mention_count(b, o, i)) / f64::from(nb);
            sum += d * d;
        }
    }
    sum.sqrt()
}

pub fn saliency_distance_matrix(tensor: &SaliencyTensor) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(tensor.languages.clone(), |a, b| {
        Ok::<_, Error>(slice_distance(tensor, a, b))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypologyCorrelation {
    pub languages: Vec<String>,
    /// Languages in the saliency matrix but not in the typology matrix.
    pub missing_from_typology: Vec<String>,
    /// Languages in the typology matrix but not in the saliency matrix.
    pub missing_from_saliency: Vec<String>,
    pub mantel: MantelResult,
}

/// Mantel test between the saliency distances and a typological distance
/// matrix over their common languages.
pub fn correlate_typology(
    saliency: &DistanceMatrix,
    typology: &DistanceMatrix,
    permutations: usize,
    seed: u64,
) -> Result<TypologyCorrelation> {
    let common: Vec<String> = saliency
        .labels()
        .iter()
        .filter(|l| typology.labels().contains(l))
        .cloned()
        .collect();
    if common.len() < 3 {
        return Err(Error::Invalid(format!(
            "only {} languages shared with the typology matrix, need 3",
            common.len()
        )));
    }
    let missing = |from: &DistanceMatrix, other: &DistanceMatrix| -> Vec<String> {
        from.labels()
            .iter()
            .filter(|l| !other.labels().contains(l))
            .cloned()
            .collect()
    };
    let a = saliency.select(&common)?;
    let b = typology.select(&common)?;
    Ok(TypologyCorrelation {
        mantel: mantel(&a, &b, permutations, seed)?,
        missing_from_typology: missing(saliency, typology),
        missing_from_saliency: missing(typology, saliency),
        languages: common,
    })
}
