//! Entity extraction from tagged captions.
//!
//! Noun phrases are maximal runs of `NOUN`/`PROPN` tokens. Each phrase is
//! looked up in WordNet (dropping leading tokens until something matches
//! the inventory), every matching sense is reported as its most specific
//! inventory member, and remaining ambiguity is settled by a
//! [`DisambiguationScorer`]. The result is closed under inventory
//! ancestry.

mod scorer;

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{CaptionKey, TaggedCaption};
use crate::inventory::{count_instantiations, InstantiationCounts, SynsetInventory};
use crate::wordnet::{SynsetId, SynsetTree};

pub use scorer::{
    resolve, DisambiguationScorer, FallbackScorer, RemoteScorer, Resolution, ScoreRequest, ScoreResponse,
    ScorerError, SLOT,
};

const NOUN_TAGS: [&str; 2] = ["NOUN", "PROPN"];

/// A maximal run of nouns; `start..=end` are token indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounPhrase {
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<String>,
}

impl NounPhrase {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn span_label(&self) -> String {
        format!("{}:{}", self.start, self.end)
    }
}

pub fn extract_noun_phrases(caption: &TaggedCaption) -> Vec<NounPhrase> {
    let mut out = Vec::new();
    let mut run: Option<NounPhrase> = None;
    for (i, tok) in caption.tokens.iter().enumerate() {
        if NOUN_TAGS.contains(&tok.upos.as_str()) {
            let phrase = run.get_or_insert_with(|| NounPhrase {
                start: i,
                end: i,
                tokens: Vec::new(),
            });
            phrase.end = i;
            phrase.tokens.push(tok.surface.clone());
        } else if let Some(phrase) = run.take() {
            out.push(phrase);
        }
    }
    out.extend(run);
    out
}

/// One inventory candidate for a phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Inventory member reported for the sense.
    pub synset: SynsetId,
    /// The WordNet sense the phrase resolved to.
    pub sense: SynsetId,
    /// 1-based position of `sense` in the lookup result.
    pub sense_rank: u32,
    /// Index of the first phrase token used in the lookup (after backoff).
    pub first_token: usize,
}

/// Inventory candidates for a phrase, most frequent sense first.
///
/// The full phrase is tried first; while no sense reaches the inventory the
/// leftmost token is dropped. Senses mapping to the same inventory member
/// are collapsed onto the earliest one.
pub fn map_phrase(
    tree: &SynsetTree,
    inventory: &SynsetInventory,
    phrase: &NounPhrase,
) -> Result<Vec<Candidate>> {
    for first in 0..phrase.tokens.len() {
        let words = phrase.tokens[first..].join(" ");
        let mut candidates: Vec<Candidate> = Vec::new();
        for (rank, sense) in tree.lookup(&words).into_iter().enumerate() {
            if let Some(member) = inventory.deepest_member(tree, &sense)? {
                if candidates.iter().all(|c| c.synset != member) {
                    candidates.push(Candidate {
                        synset: member,
                        sense,
                        sense_rank: rank as u32 + 1,
                        first_token: first,
                    });
                }
            }
        }
        if !candidates.is_empty() {
            return Ok(candidates);
        }
    }
    Ok(Vec::new())
}

/// First-sense mappings of every noun phrase against the whole tree, used
/// to bootstrap inventory counts before an inventory exists.
pub fn bootstrap_mappings(tree: &SynsetTree, caption: &TaggedCaption) -> Vec<(String, SynsetId)> {
    extract_noun_phrases(caption)
        .into_iter()
        .filter_map(|phrase| {
            (0..phrase.tokens.len()).find_map(|first| {
                let words = phrase.tokens[first..].join(" ");
                tree.lookup(&words).into_iter().next().map(|s| (words, s))
            })
        })
        .collect()
}

/// Instantiation counts from the first-sense mappings of all captions,
/// counted per shard and merged.
pub fn bootstrap_counts(tree: &SynsetTree, captions: &[TaggedCaption]) -> Result<InstantiationCounts> {
    captions
        .par_iter()
        .map(|c| {
            let mappings = bootstrap_mappings(tree, c);
            count_instantiations(tree, mappings.iter().map(|(p, s)| (p.as_str(), s)))
        })
        .try_reduce(InstantiationCounts::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub phrase: NounPhrase,
    pub synset: SynsetId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    pub caption_key: CaptionKey,
    pub mentions: Vec<Mention>,
    /// Mentioned synsets plus all their inventory ancestors.
    pub closure: BTreeSet<SynsetId>,
}

#[derive(Serialize)]
struct ResultLine<'a> {
    caption_key: String,
    mentions: Vec<(String, &'a str)>,
    closure: Vec<&'a str>,
}

impl ExtractionResult {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&ResultLine {
            caption_key: self.caption_key.to_string(),
            mentions: self
                .mentions
                .iter()
                .map(|m| (m.phrase.span_label(), m.synset.lemma_key()))
                .collect(),
            closure: self.closure.iter().map(SynsetId::lemma_key).collect(),
        })
        .expect("result serializes")
    }
}

/// A fallback taken because the configured scorer failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Degradation {
    pub caption_key: String,
    pub phrase: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptionExtraction {
    pub result: ExtractionResult,
    pub degradations: Vec<Degradation>,
}

/// Extraction context shared by all captions.
pub struct Extractor<'a> {
    tree: &'a SynsetTree,
    inventory: &'a SynsetInventory,
    scorer: &'a dyn DisambiguationScorer,
    representatives: HashMap<String, String>,
}

impl<'a> Extractor<'a> {
    pub fn new(
        tree: &'a SynsetTree,
        inventory: &'a SynsetInventory,
        scorer: &'a dyn DisambiguationScorer,
    ) -> Self {
        Self {
            tree,
            inventory,
            scorer,
            representatives: HashMap::new(),
        }
    }

    /// Overrides the phrase used to stand for a synset in disambiguation
    /// requests (keyed by synset key).
    pub fn with_representatives(mut self, representatives: HashMap<String, String>) -> Self {
        self.representatives = representatives;
        self
    }

    pub fn representative(&self, id: &SynsetId) -> String {
        if let Some(r) = self.representatives.get(id.lemma_key()) {
            return r.clone();
        }
        self.tree
            .get(id)
            .map_or_else(|| id.lemma().replace('_', " "), |s| s.display_name())
    }

    pub fn extract_caption(&self, caption: &TaggedCaption) -> CaptionExtraction {
        let key = caption.key();
        let (text, offsets) = token_offsets(caption);
        let mut mentions = Vec::new();
        let mut degradations = Vec::new();
        for phrase in extract_noun_phrases(caption) {
            let candidates = match map_phrase(self.tree, self.inventory, &phrase) {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("{key}: skipping phrase `{}`: {e}", phrase.text());
                    continue;
                }
            };
            let synset = match candidates.len() {
                0 => continue,
                1 => candidates[0].synset.clone(),
                _ => {
                    let first = phrase.start + candidates[0].first_token;
                    let request = DisambiguationRequest {
                        caption_text: text.clone(),
                        span: offsets[first].start..offsets[phrase.end].end,
                        candidates: candidates
                            .iter()
                            .map(|c| DisambiguationCandidate {
                                synset: c.synset.clone(),
                                phrase: self.representative(&c.synset),
                                sense_rank: c.sense_rank,
                            })
                            .collect(),
                    };
                    let resolution = resolve(&request, self.scorer);
                    if let Some(reason) = resolution.degraded {
                        log::warn!("{key}: scorer fell back for `{}`: {reason}", phrase.text());
                        degradations.push(Degradation {
                            caption_key: key.to_string(),
                            phrase: phrase.text(),
                            reason,
                        });
                    }
                    resolution.synset
                }
            };
            mentions.push(Mention { phrase, synset });
        }
        let mut closure = BTreeSet::new();
        for m in &mentions {
            match self.inventory.closure(self.tree, &m.synset) {
                Ok(c) => closure.extend(c),
                Err(e) => log::warn!("{key}: no closure for {}: {e}", m.synset),
            }
        }
        CaptionExtraction {
            result: ExtractionResult {
                caption_key: key,
                mentions,
                closure,
            },
            degradations,
        }
    }

    /// Extracts all captions in parallel; output order follows input order.
    pub fn extract_all(&self, captions: &[TaggedCaption]) -> Vec<CaptionExtraction> {
        captions.par_iter().map(|c| self.extract_caption(c)).collect()
    }
}

/// Byte ranges of each token inside the caption text. Tokens are searched
/// left to right in `text_en`; if one cannot be found the text is rebuilt
/// by joining the token surfaces with spaces.
fn token_offsets(caption: &TaggedCaption) -> (String, Vec<Range<usize>>) {
    let text = &caption.record.text_en;
    let mut cursor = 0;
    let mut ranges = Vec::with_capacity(caption.tokens.len());
    for tok in &caption.tokens {
        match text[cursor..].find(tok.surface.as_str()) {
            Some(pos) if !tok.surface.is_empty() => {
                let start = cursor + pos;
                cursor = start + tok.surface.len();
                ranges.push(start..cursor);
            }
            _ => break,
        }
    }
    if ranges.len() == caption.tokens.len() {
        return (text.clone(), ranges);
    }
    let mut joined = String::new();
    let mut ranges = Vec::with_capacity(caption.tokens.len());
    for tok in &caption.tokens {
        if !joined.is_empty() {
            joined.push(' ');
        }
        let start = joined.len();
        joined.push_str(&tok.surface);
        ranges.push(start..joined.len());
    }
    (joined, ranges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisambiguationCandidate {
    pub synset: SynsetId,
    /// Phrase substituted into the caption for this candidate.
    pub phrase: String,
    /// WordNet sense order, used to break ties.
    pub sense_rank: u32,
}

/// An ambiguous phrase in its caption, with at least two candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct DisambiguationRequest {
    pub caption_text: String,
    /// Byte range of the ambiguous phrase in `caption_text`.
    pub span: Range<usize>,
    pub candidates: Vec<DisambiguationCandidate>,
}

impl DisambiguationRequest {
    /// The caption with the ambiguous phrase replaced by [`SLOT`].
    pub fn template(&self) -> Result<String> {
        let text = &self.caption_text;
        if self.span.start > self.span.end
            || self.span.end > text.len()
            || !text.is_char_boundary(self.span.start)
            || !text.is_char_boundary(self.span.end)
        {
            return Err(Error::Invalid(format!(
                "span {:?} outside caption of {} bytes",
                self.span,
                text.len()
            )));
        }
        if text.contains(SLOT) {
            return Err(Error::Invalid(format!("caption already contains {SLOT}")));
        }
        Ok(format!(
            "{}{SLOT}{}",
            &text[..self.span.start],
            &text[self.span.end..]
        ))
    }
}

/// Reads extraction JSONL back, resolving synset keys against `tree`.
pub fn parse_extraction_results(tree: &SynsetTree, text: &str) -> Result<Vec<ExtractionResult>> {
    #[derive(serde::Deserialize)]
    struct Line {
        caption_key: CaptionKey,
        mentions: Vec<(String, String)>,
        closure: Vec<String>,
    }
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::Parse {
            file: "extractions".into(),
            line: n + 1,
            message: m,
        };
        let line: Line = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let mut mentions = Vec::with_capacity(line.mentions.len());
        for (span, key) in line.mentions {
            let (start, end) = span
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| bad(format!("malformed span `{span}`")))?;
            mentions.push(Mention {
                phrase: NounPhrase {
                    start,
                    end,
                    tokens: Vec::new(),
                },
                synset: tree.id(&key)?,
            });
        }
        let closure = line
            .closure
            .iter()
            .map(|k| tree.id(k))
            .collect::<Result<BTreeSet<_>>>()?;
        out.push(ExtractionResult {
            caption_key: line.caption_key,
            mentions,
            closure,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CaptionRecord, Token};

    fn tagged(words: &[(&str, &str)]) -> TaggedCaption {
        let text = words.iter().map(|(w, _)| *w).collect::<Vec<_>>().join(" ");
        TaggedCaption {
            record: CaptionRecord {
                image_id: "img".into(),
                language: "en".into(),
                text: text.clone(),
                text_en: text,
                index: 0,
            },
            tokens: words
                .iter()
                .map(|(w, t)| Token {
                    surface: w.to_string(),
                    upos: t.to_string(),
                })
                .collect(),
        }
    }

    fn spans(c: &TaggedCaption) -> Vec<(usize, usize)> {
        extract_noun_phrases(c).iter().map(|p| (p.start, p.end)).collect()
    }

    #[test]
    fn maximal_noun_runs() {
        let c = tagged(&[
            ("the", "DET"),
            ("dog", "NOUN"),
            ("chases", "VERB"),
            ("a", "DET"),
            ("fire", "NOUN"),
            ("engine", "NOUN"),
        ]);
        assert_eq!(spans(&c), [(1, 1), (4, 5)]);
        assert_eq!(extract_noun_phrases(&c)[1].text(), "fire engine");
    }

    #[test]
    fn no_nouns() {
        let c = tagged(&[("run", "VERB"), ("jump", "VERB")]);
        assert!(spans(&c).is_empty());
    }

    #[test]
    fn caption_with_back_and_camera() {
        let c = tagged(&[
            ("A", "DET"),
            ("woman", "NOUN"),
            ("standing", "VERB"),
            ("with", "ADP"),
            ("her", "PRON"),
            ("back", "NOUN"),
            ("to", "ADP"),
            ("the", "DET"),
            ("camera", "NOUN"),
        ]);
        let phrases: Vec<String> = extract_noun_phrases(&c).iter().map(NounPhrase::text).collect();
        assert_eq!(phrases, ["woman", "back", "camera"]);
    }

    #[test]
    fn propn_joins_runs_and_trailing_run_is_kept() {
        let c = tagged(&[("Tokyo", "PROPN"), ("tower", "NOUN")]);
        assert_eq!(spans(&c), [(0, 1)]);
    }

    #[test]
    fn offsets_follow_original_text() {
        let mut c = tagged(&[("A", "DET"), ("dog", "NOUN"), (".", "PUNCT")]);
        c.record.text_en = "A dog.".into();
        let (text, ranges) = token_offsets(&c);
        assert_eq!(text, "A dog.");
        assert_eq!(ranges, [0..1, 2..5, 5..6]);
        c.record.text_en = "Something else".into();
        let (text, ranges) = token_offsets(&c);
        assert_eq!(text, "A dog .");
        assert_eq!(ranges[1], 2..5);
    }

    #[test]
    fn template_replaces_span() {
        let req = DisambiguationRequest {
            caption_text: "a dog on a bank".into(),
            span: 11..15,
            candidates: Vec::new(),
        };
        assert_eq!(req.template().unwrap(), "a dog on a {SLOT}");
        let bad = DisambiguationRequest { span: 11..40, ..req };
        assert!(bad.template().is_err());
    }
}
