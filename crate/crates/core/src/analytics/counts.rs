use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtering::FilteredResult;
use crate::stats::{pearson_test, PearsonResult};

/// Mean mentions per caption for one language, split by whether the image
/// was taken where the language is spoken (its locale equals the language
/// code).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomeAbroad {
    pub home_mean: Option<f64>,
    pub abroad_mean: Option<f64>,
    pub home_captions: usize,
    pub abroad_captions: usize,
}

fn locale_of<'a>(meta: &'a BTreeMap<String, String>, r: &FilteredResult) -> Result<&'a str> {
    meta.get(&r.caption_key.image_id)
        .map(String::as_str)
        .ok_or_else(|| Error::Invalid(format!("no image metadata for {}", r.caption_key.image_id)))
}

fn mean(sum: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Per-language home and abroad means of the number of resolved mentions
/// per caption. `meta` maps image ids to locales.
pub fn entity_counts(
    filtered: &[FilteredResult],
    meta: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, HomeAbroad>> {
    let mut acc: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
    for r in filtered {
        let home = locale_of(meta, r)? == r.caption_key.language;
        let a = acc.entry(r.caption_key.language.as_str()).or_default();
        let slot = if home { 0 } else { 2 };
        a[slot] += r.mentions.len();
        a[slot + 1] += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(l, [hs, hn, as_, an])| {
            (
                l.to_string(),
                HomeAbroad {
                    home_mean: mean(hs, hn),
                    abroad_mean: mean(as_, an),
                    home_captions: hn,
                    abroad_captions: an,
                },
            )
        })
        .collect())
}

/// Pearson correlation across languages between home and abroad means.
/// Languages without home or abroad captions are left out.
pub fn home_abroad_correlation(counts: &BTreeMap<String, HomeAbroad>) -> Result<PearsonResult> {
    let (home, abroad): (Vec<f64>, Vec<f64>) = counts
        .values()
        .filter_map(|c| Some((c.home_mean?, c.abroad_mean?)))
        .unzip();
    Ok(pearson_test(&home, &abroad)?)
}

/// Per-language mean mentions per caption over images of one locale.
pub fn per_locale_counts(
    filtered: &[FilteredResult],
    meta: &BTreeMap<String, String>,
    locale: &str,
) -> Result<BTreeMap<String, f64>> {
    let mut acc: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in filtered {
        if locale_of(meta, r)? == locale {
            let a = acc.entry(r.caption_key.language.as_str()).or_default();
            a.0 += r.mentions.len();
            a.1 += 1;
        }
    }
    Ok(acc
        .into_iter()
        .filter_map(|(l, (s, n))| Some((l.to_string(), mean(s, n)?)))
        .collect())
}
