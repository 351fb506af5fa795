use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::SaliencyTensor;
use crate::error::{Error, Result};
use crate::inventory::SynsetInventory;
use crate::stats::{bonferroni, wilcoxon_signed_rank, StatsError, WilcoxonResult};
use crate::wordnet::SynsetId;

/// Mean saliency per (language, entity) over the images where the entity's
/// root is present.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSaliency {
    languages: Vec<String>,
    entities: Vec<SynsetId>,
    /// Per entity, whether each tensor image belongs to `I_o`.
    support: Vec<Vec<bool>>,
    /// Sum of saliency values, per (language, entity).
    sums: Vec<f64>,
    /// Images contributing to the sum, per (language, entity).
    cells: Vec<u32>,
}

impl GlobalSaliency {
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn entities(&self) -> &[SynsetId] {
        &self.entities
    }

    /// Global saliency, or `None` when no image of `I_o` has captions in
    /// the language.
    pub fn value(&self, l: usize, o: usize) -> Option<f64> {
        let k = l * self.entities.len() + o;
        (self.cells[k] > 0).then(|| self.sums[k] / f64::from(self.cells[k]))
    }

    pub fn images_used(&self, l: usize, o: usize) -> u32 {
        self.cells[l * self.entities.len() + o]
    }

    pub fn support_size(&self, o: usize) -> usize {
        self.support[o].iter().filter(|&&b| b).count()
    }

    pub fn get(&self, language: &str, entity: &str) -> Option<f64> {
        let l = self.languages.iter().position(|x| x == language)?;
        let o = self.entities.iter().position(|e| e.lemma_key() == entity)?;
        self.value(l, o)
    }
}

pub fn global_saliency(
    tensor: &SaliencyTensor,
    presence: &BTreeMap<String, BTreeSet<String>>,
    inventory: &SynsetInventory,
) -> Result<GlobalSaliency> {
    let mut image_roots = Vec::with_capacity(tensor.images().len());
    for image in tensor.images() {
        image_roots.push(
            presence
                .get(image)
                .ok_or_else(|| Error::MissingPresence(image.clone()))?,
        );
    }
    let (nl, no) = (tensor.languages().len(), tensor.entities().len());
    let mut support = Vec::with_capacity(no);
    for entity in tensor.entities() {
        let root = inventory
            .root(entity)
            .ok_or_else(|| Error::Integrity(format!("{entity} has no root in the inventory")))?;
        support.push(
            image_roots
                .iter()
                .map(|roots| roots.contains(root.lemma_key()))
                .collect::<Vec<_>>(),
        );
    }
    let mut sums = vec![0.0; nl * no];
    let mut cells = vec![0u32; nl * no];
    for l in 0..nl {
        for (o, mask) in support.iter().enumerate() {
            for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
                if let Some(v) = tensor.value(l, o, i) {
                    sums[l * no + o] += v;
                    cells[l * no + o] += 1;
                }
            }
        }
    }
    Ok(GlobalSaliency {
        languages: tensor.languages().to_vec(),
        entities: tensor.entities().to_vec(),
        support,
        sums,
        cells,
    })
}

/// How the cross-language mean of [`saliency_spread`] weights its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadWeighting {
    /// Every language counts once.
    #[default]
    Languages,
    /// Every (language, image) cell counts once.
    Cells,
}

impl std::str::FromStr for SpreadWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "languages" => Ok(Self::Languages),
            "cells" => Ok(Self::Cells),
            _ => Err(Error::Invalid(format!(
                "unknown weighting {s:?}, expected languages or cells"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadEntry {
    pub entity: SynsetId,
    pub mean: f64,
    /// Population standard deviation across languages.
    pub std: f64,
    pub languages: usize,
}

/// Cross-language mean and spread per entity, sorted by standard deviation
/// descending. Entities without any value are left out.
pub fn saliency_spread(gs: &GlobalSaliency, weighting: SpreadWeighting) -> Vec<SpreadEntry> {
    let no = gs.entities.len();
    let mut out = Vec::new();
    for (o, entity) in gs.entities.iter().enumerate() {
        let values: Vec<f64> = (0..gs.languages.len()).filter_map(|l| gs.value(l, o)).collect();
        if values.is_empty() {
            continue;
        }
        let n = values.len() as f64;
        let lang_mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - lang_mean).powi(2)).sum::<f64>() / n).sqrt();
        let mean = match weighting {
            SpreadWeighting::Languages => lang_mean,
            SpreadWeighting::Cells => {
                let (s, c) = (0..gs.languages.len()).fold((0.0, 0u32), |(s, c), l| {
                    (s + gs.sums[l * no + o], c + gs.cells[l * no + o])
                });
                s / f64::from(c)
            }
        };
        out.push(SpreadEntry {
            entity: entity.clone(),
            mean,
            std,
            languages: values.len(),
        });
    }
    out.sort_by(|a, b| b.std.total_cmp(&a.std).then_with(|| a.entity.cmp(&b.entity)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub entity: SynsetId,
    pub saliency_l: Option<f64>,
    pub saliency_k: Option<f64>,
    /// `saliency_l / saliency_k`; infinite when only `saliency_k` is zero,
    /// absent when both are zero or either is missing.
    pub ratio: Option<f64>,
    pub paired_images: usize,
    pub wilcoxon: Option<WilcoxonResult>,
    pub p: Option<f64>,
    pub significant: bool,
    pub note: Option<String>,
}

/// Compares two languages entity by entity. Each entity with at least two
/// images of `I_o` captioned in both languages gets a Wilcoxon test on the
/// paired per-image saliencies; significance is Bonferroni-corrected over
/// the tested entities. Sorted by ratio descending.
pub fn compare_languages(
    tensor: &SaliencyTensor,
    gs: &GlobalSaliency,
    l: &str,
    k: &str,
    entities: &[SynsetId],
    alpha: f64,
    exact_cutoff: usize,
) -> Result<Vec<Comparison>> {
    let li = tensor.language_index(l)?;
    let ki = tensor.language_index(k)?;
    let mut out = Vec::with_capacity(entities.len());
    for entity in entities {
        let o = tensor
            .entity_index(entity)
            .ok_or_else(|| Error::Invalid(format!("{entity} is not in the inventory")))?;
        let (sl, sk) = (gs.value(li, o), gs.value(ki, o));
        let ratio = match (sl, sk) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            (Some(a), Some(_)) if a > 0.0 => Some(f64::INFINITY),
            _ => None,
        };
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, _) in gs.support[o].iter().enumerate().filter(|(_, &b)| b) {
            if let (Some(a), Some(b)) = (tensor.value(li, o, i), tensor.value(ki, o, i)) {
                x.push(a);
                y.push(b);
            }
        }
        let mut cmp = Comparison {
            entity: entity.clone(),
            saliency_l: sl,
            saliency_k: sk,
            ratio,
            paired_images: x.len(),
            wilcoxon: None,
            p: None,
            significant: false,
            note: None,
        };
        if x.len() < 2 {
            cmp.note = Some(format!("{} paired images, not tested", x.len()));
        } else {
            match wilcoxon_signed_rank(&x, &y, exact_cutoff) {
                Ok(w) => {
                    cmp.p = Some(w.p);
                    cmp.wilcoxon = Some(w);
                }
                Err(StatsError::AllZeroDifferences) => {
                    cmp.p = Some(1.0);
                    cmp.note = Some("all paired differences are zero".into());
                }
                Err(e) => return Err(e.into()),
            }
        }
        out.push(cmp);
    }
    let tested: Vec<usize> = (0..out.len()).filter(|&i| out[i].p.is_some()).collect();
    if !tested.is_empty() {
        let p: Vec<f64> = tested.iter().map(|&i| out[i].p.unwrap_or(1.0)).collect();
        let correction = bonferroni(&p, alpha)?;
        for (&i, sig) in tested.iter().zip(correction.significant) {
            out[i].significant = sig;
        }
    }
    out.sort_by(|a, b| match (a.ratio, b.ratio) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.entity.cmp(&b.entity)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.entity.cmp(&b.entity),
    });
    Ok(out)
}
