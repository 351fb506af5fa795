//! Presence filtering of extracted synsets and validation against gold
//! annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extraction::{parse_extraction_results, ExtractionResult, Mention};
use crate::ingest::CaptionKey;
use crate::inventory::SynsetInventory;
use crate::wordnet::{SynsetId, SynsetTree};

/// What to do with a caption whose image has no presence annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPresence {
    #[default]
    Error,
    PassThrough,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredResult {
    pub caption_key: CaptionKey,
    /// Mentions whose root is present in the image.
    pub mentions: Vec<Mention>,
    pub closure: BTreeSet<SynsetId>,
}

impl FilteredResult {
    pub fn to_json_line(&self) -> String {
        ExtractionResult {
            caption_key: self.caption_key.clone(),
            mentions: self.mentions.clone(),
            closure: self.closure.clone(),
        }
        .to_json_line()
    }
}

impl From<ExtractionResult> for FilteredResult {
    fn from(r: ExtractionResult) -> Self {
        Self {
            caption_key: r.caption_key,
            mentions: r.mentions,
            closure: r.closure,
        }
    }
}

pub fn parse_filtered_results(tree: &SynsetTree, text: &str) -> Result<Vec<FilteredResult>> {
    Ok(parse_extraction_results(tree, text)?
        .into_iter()
        .map(FilteredResult::from)
        .collect())
}

/// Keeps the synsets whose root is among `roots_present`.
pub fn filter(
    result: &ExtractionResult,
    roots_present: Option<&BTreeSet<String>>,
    inventory: &SynsetInventory,
    policy: MissingPresence,
) -> Result<FilteredResult> {
    let Some(present) = roots_present else {
        return match policy {
            MissingPresence::Error => Err(Error::MissingPresence(result.caption_key.image_id.clone())),
            MissingPresence::PassThrough => {
                log::warn!(
                    "{}: no presence annotation, keeping all synsets",
                    result.caption_key
                );
                Ok(result.clone().into())
            }
        };
    };
    let keep = |id: &SynsetId| -> Result<bool> {
        let root = inventory
            .root(id)
            .ok_or_else(|| Error::Integrity(format!("{id} has no root in the inventory")))?;
        Ok(present.contains(root.lemma_key()))
    };
    let mut closure = BTreeSet::new();
    for id in &result.closure {
        if keep(id)? {
            closure.insert(id.clone());
        }
    }
    let mut mentions = Vec::new();
    for m in &result.mentions {
        if keep(&m.synset)? {
            mentions.push(m.clone());
        }
    }
    Ok(FilteredResult {
        caption_key: result.caption_key.clone(),
        mentions,
        closure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptionValidation {
    pub caption_key: String,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub true_positives: usize,
    pub predicted_count: usize,
    pub gold_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub per_caption: Vec<CaptionValidation>,
}

impl ValidationReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<40} {:>6} {:>6} {:>6}", "caption", "tp", "pred", "gold");
        for c in &self.per_caption {
            let _ = writeln!(
                out,
                "{:<40} {:>6} {:>6} {:>6}",
                c.caption_key, c.true_positives, c.predicted, c.gold
            );
        }
        let _ = writeln!(
            out,
            "{:<40} {:>6} {:>6} {:>6}",
            "total", self.true_positives, self.predicted_count, self.gold_count
        );
        let _ = writeln!(out, "precision {:.4}", self.precision);
        let _ = writeln!(out, "recall    {:.4}", self.recall);
        out
    }
}

/// Micro-averaged precision and recall over the captions present in `gold`.
pub fn validate<T: Ord>(
    predicted: &BTreeMap<CaptionKey, BTreeSet<T>>,
    gold: &BTreeMap<CaptionKey, BTreeSet<T>>,
) -> ValidationReport {
    let empty = BTreeSet::new();
    let mut per_caption = Vec::with_capacity(gold.len());
    let (mut tp, mut npred, mut ngold) = (0, 0, 0);
    for (key, g) in gold {
        let p = predicted.get(key).unwrap_or(&empty);
        let hits = p.intersection(g).count();
        tp += hits;
        npred += p.len();
        ngold += g.len();
        per_caption.push(CaptionValidation {
            caption_key: key.to_string(),
            true_positives: hits,
            predicted: p.len(),
            gold: g.len(),
        });
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    ValidationReport {
        true_positives: tp,
        predicted_count: npred,
        gold_count: ngold,
        precision: ratio(tp, npred),
        recall: ratio(tp, ngold),
        per_caption,
    }
}

/// Ancestor-closes gold synset lists within the inventory.
pub fn close_gold(
    tree: &SynsetTree,
    inventory: &SynsetInventory,
    gold: &BTreeMap<CaptionKey, BTreeSet<String>>,
) -> Result<BTreeMap<CaptionKey, BTreeSet<SynsetId>>> {
    gold.iter()
        .map(|(key, synsets)| {
            let mut closed = BTreeSet::new();
            for s in synsets {
                let id = tree.id(s)?;
                if !inventory.contains(&id) {
                    return Err(Error::Invalid(format!(
                        "gold synset {s} for {key} is not in the inventory"
                    )));
                }
                closed.extend(inventory.closure(tree, &id)?);
            }
            Ok((key.clone(), closed))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(entries: &[(&str, &[&str])]) -> BTreeMap<CaptionKey, BTreeSet<String>> {
        entries
            .iter()
            .map(|(k, v)| (k.parse().unwrap(), v.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    #[test]
    fn two_of_three() {
        let p = sets(&[("a|en|0", &["a", "b", "c"])]);
        let g = sets(&[("a|en|0", &["b", "c", "d"])]);
        let r = validate(&p, &g);
        assert_eq!((r.true_positives, r.predicted_count, r.gold_count), (2, 3, 3));
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn large_counts_round_to_ninety_seven_percent() {
        // 247 predicted, 240 matched, 247 gold
        let pred: Vec<String> = (0..247).map(|i| format!("s{i}")).collect();
        let mut gold: Vec<String> = (0..240).map(|i| format!("s{i}")).collect();
        gold.extend((0..7).map(|i| format!("g{i}")));
        let k: CaptionKey = "x|en|0".parse().unwrap();
        let p = BTreeMap::from([(k.clone(), pred.into_iter().collect())]);
        let g = BTreeMap::from([(k, gold.into_iter().collect())]);
        let r = validate(&p, &g);
        assert!((r.precision - 240.0 / 247.0).abs() < 1e-15);
        assert_eq!(format!("{:.2}", r.precision), "0.97");
        assert_eq!(format!("{:.2}", r.recall), "0.97");
    }

    #[test]
    fn empty_sides() {
        let r = validate(&sets(&[]), &sets(&[("a|en|0", &[])]));
        assert_eq!((r.precision, r.recall), (1.0, 1.0));
        let r = validate(&sets(&[("b|en|0", &["x"])]), &sets(&[("a|en|0", &["y"])]));
        assert_eq!(r.predicted_count, 0);
        assert_eq!(r.recall, 0.0);
    }

    #[test]
    fn precision_recall_duality() {
        let p = sets(&[("a|en|0", &["a", "b"]), ("b|en|0", &["c"])]);
        let g = sets(&[("a|en|0", &["b"]), ("b|en|0", &["c", "d", "e"])]);
        assert_eq!(validate(&p, &g).precision, validate(&g, &p).recall);
    }
}
