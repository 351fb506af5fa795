use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::filtering::FilteredResult;
use crate::wordnet::SynsetTree;

/// Mention counts per language and synset depth. Depths count hypernym
/// edges from the top of the canonical chain, so `entity.n.01` sits at 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DepthHistogram {
    pub per_language: BTreeMap<String, BTreeMap<usize, u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthSummary {
    pub language: String,
    pub total: u64,
    pub mode: Option<usize>,
    pub mean: Option<f64>,
    /// Share of mentions with depth in the central window.
    pub central_mass: f64,
    pub concentrated: bool,
}

impl DepthHistogram {
    pub fn total(&self, language: &str) -> u64 {
        self.per_language.get(language).map_or(0, |h| h.values().sum())
    }

    /// Summarises each language; `concentrated` is set when at least half
    /// of the mentions fall within `lo..=hi`.
    pub fn summary(&self, lo: usize, hi: usize) -> Vec<DepthSummary> {
        self.per_language
            .iter()
            .map(|(language, h)| {
                let total: u64 = h.values().sum();
                let central: u64 = h.range(lo..=hi).map(|(_, c)| c).sum();
                let mode = h
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(d, _)| *d);
                let mean = (total > 0)
                    .then(|| h.iter().map(|(d, c)| (*d as f64) * (*c as f64)).sum::<f64>() / total as f64);
                let central_mass = if total == 0 {
                    0.0
                } else {
                    central as f64 / total as f64
                };
                DepthSummary {
                    language: language.clone(),
                    total,
                    mode,
                    mean,
                    central_mass,
                    concentrated: central_mass >= 0.5,
                }
            })
            .collect()
    }
}

/// Histogram of the depths of resolved mention synsets.
pub fn depth_histogram(filtered: &[FilteredResult], tree: &SynsetTree) -> Result<DepthHistogram> {
    let mut out = DepthHistogram::default();
    for r in filtered {
        let h = out
            .per_language
            .entry(r.caption_key.language.clone())
            .or_default();
        for m in &r.mentions {
            *h.entry(tree.depth(&m.synset)?).or_default() += 1;
        }
    }
    Ok(out)
}
