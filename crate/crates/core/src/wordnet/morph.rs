//! Noun morphology: exception list first, then WordNet's suffix detachment
//! rules.

use super::SynsetTree;

const NOUN_DETACHMENTS: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

/// Lowercases, trims and joins whitespace-separated words with `_`.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// Indexed base forms of an already normalized phrase, in lookup order.
pub(super) fn base_forms(tree: &SynsetTree, form: &str) -> Vec<String> {
    let candidates: Vec<String> = match tree.exceptions.get(form) {
        Some(bases) => std::iter::once(form.to_string())
            .chain(bases.iter().cloned())
            .collect(),
        None => std::iter::once(form.to_string())
            .chain(NOUN_DETACHMENTS.iter().filter_map(|(suffix, ending)| {
                form.strip_suffix(suffix).map(|stem| format!("{stem}{ending}"))
            }))
            .collect(),
    };
    let mut out: Vec<String> = Vec::new();
    for c in candidates {
        if tree.lemma_index.contains_key(&c) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_phrase("Fire  Engine"), "fire_engine");
        assert_eq!(normalize_phrase("fire_engine"), "fire_engine");
        assert_eq!(normalize_phrase("   "), "");
    }
}
