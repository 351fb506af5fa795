//! CSV renderings of analytics results. Absent values are empty cells and
//! infinite ratios are written as `inf`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Comparison, DepthHistogram, GlobalSaliency, HomeAbroad, SaliencyTensor, SpreadEntry};
use crate::stats::DistanceMatrix;

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.to_string(),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

/// Long format: one row per present (language, entity, image) cell.
pub fn tensor_csv(tensor: &SaliencyTensor) -> String {
    let mut out = String::from("language,entity,image,mentions,captions,saliency\n");
    for (l, lang) in tensor.languages().iter().enumerate() {
        for (o, entity) in tensor.entities().iter().enumerate() {
            for (i, image) in tensor.images().iter().enumerate() {
                if let Some(v) = tensor.value(l, o, i) {
                    let _ = writeln!(
                        out,
                        "{lang},{entity},{image},{},{},{v}",
                        tensor.mention_count(l, o, i),
                        tensor.caption_count(l, i)
                    );
                }
            }
        }
    }
    out
}

pub fn distance_matrix_csv(m: &DistanceMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, ",{}", m.labels().join(","));
    for (label, row) in m.labels().iter().zip(m.rows()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{label},{}", cells.join(","));
    }
    out
}

/// Long format: one row per (language, entity) with a value.
pub fn global_saliency_csv(gs: &GlobalSaliency) -> String {
    let mut out = String::from("language,entity,global_saliency,images\n");
    for (l, lang) in gs.languages().iter().enumerate() {
        for (o, entity) in gs.entities().iter().enumerate() {
            if let Some(v) = gs.value(l, o) {
                let _ = writeln!(out, "{lang},{entity},{v},{}", gs.images_used(l, o));
            }
        }
    }
    out
}

pub fn spread_csv(spread: &[SpreadEntry]) -> String {
    let mut out = String::from("entity,mean,std,languages\n");
    for s in spread {
        let _ = writeln!(out, "{},{},{},{}", s.entity, s.mean, s.std, s.languages);
    }
    out
}

pub fn comparison_csv(rows: &[Comparison]) -> String {
    let mut out =
        String::from("entity,saliency_l,saliency_k,ratio,paired_images,statistic,p,significant,note\n");
    for c in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.entity,
            num(c.saliency_l),
            num(c.saliency_k),
            num(c.ratio),
            c.paired_images,
            num(c.wilcoxon.map(|w| w.statistic)),
            num(c.p),
            c.significant,
            c.note.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn histogram_csv(h: &DepthHistogram) -> String {
    let mut out = String::from("language,depth,mentions\n");
    for (lang, bins) in &h.per_language {
        for (depth, count) in bins {
            let _ = writeln!(out, "{lang},{depth},{count}");
        }
    }
    out
}

pub fn counts_csv(counts: &BTreeMap<String, HomeAbroad>) -> String {
    let mut out = String::from("language,home_mean,abroad_mean,home_captions,abroad_captions\n");
    for (lang, c) in counts {
        let _ = writeln!(
            out,
            "{lang},{},{},{},{}",
            num(c.home_mean),
            num(c.abroad_mean),
            c.home_captions,
            c.abroad_captions
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_cells() {
        assert_eq!(num(None), "");
        assert_eq!(num(Some(f64::INFINITY)), "inf");
        assert_eq!(num(Some(0.5)), "0.5");
    }
}
