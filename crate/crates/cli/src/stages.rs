//! One function per subcommand. Each reads its inputs through a
//! [`Stage`], writes its artifacts and finishes with a manifest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use saliency_core::analytics::{
    build_tensor, compare_languages, correlate_typology, depth_histogram, entity_counts, global_saliency,
    home_abroad_correlation, per_locale_counts, saliency_distance_matrix, saliency_spread, tables,
    CaptionIndex, GlobalSaliency, SaliencyTensor,
};
use saliency_core::extraction::{bootstrap_counts, parse_extraction_results, DisambiguationScorer};
use saliency_core::filtering::{close_gold, filter, parse_filtered_results, validate};
use saliency_core::ingest::{
    exclude_languages, join_captions, parse_captions, parse_conllu, parse_distance_matrix, parse_gold,
    parse_image_meta, parse_presence, presence_map, CaptionRecord, Reject, TaggedCaption,
};
use saliency_core::inventory::{parse_root_candidates, select_inventory, DEFAULT_ROOTS};
use saliency_core::wordnet::{parse_edit_script, parse_wordnet, DEFAULT_EDIT_SCRIPT};
use saliency_core::{
    Error, Extractor, FallbackScorer, FilteredResult, RemoteScorer, SynsetId, SynsetInventory, SynsetRole,
    SynsetTree, Thresholds,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{PipelineConfig, Scorer};
use crate::error::CliError;
use crate::manifest::{manifest_path, read_manifest, verify, Stage};

pub const ONTOLOGY: &str = "ontology.json";
pub const INVENTORY: &str = "inventory.tsv";
pub const EXTRACTIONS: &str = "extractions.jsonl";
pub const FILTERED: &str = "filtered.jsonl";
pub const DISTANCE: &str = "distance.csv";

/// Stages in pipeline order, as they appear in manifest names.
pub const STAGES: [&str; 10] = [
    "build-ontology",
    "select-inventory",
    "extract",
    "filter",
    "validate",
    "analyze saliency",
    "analyze mantel",
    "analyze compare",
    "analyze granularity",
    "analyze counts",
];

fn need<'p>(stage: &str, key: &str, value: &'p Option<std::path::PathBuf>) -> Result<&'p Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Config(vec![format!("`{stage}` needs `{key}` in the config")]))
}

fn json_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn log_rejects(stage: &str, file: &str, rejects: &[Reject]) {
    for r in rejects {
        log::warn!("{stage}: {file}:{}: {}", r.line, r.reason);
    }
}

fn load_tree(stage: &mut Stage) -> Result<SynsetTree, CliError> {
    let text = stage.artifact(ONTOLOGY, "build-ontology")?;
    Ok(SynsetTree::from_json(&text)?)
}

fn load_inventory(stage: &mut Stage, tree: &SynsetTree) -> Result<SynsetInventory, CliError> {
    let text = stage.artifact(INVENTORY, "select-inventory")?;
    Ok(SynsetInventory::from_tsv(tree, &text)?)
}

fn load_captions(stage: &mut Stage) -> Result<Vec<CaptionRecord>, CliError> {
    let path = need(stage.name(), "captions", &stage.config.captions)?.to_path_buf();
    let parsed = parse_captions(&stage.input("captions", &path)?);
    log_rejects(stage.name(), "captions", &parsed.rejects);
    stage.note("caption_rejects", parsed.rejects.len());
    let records = exclude_languages(parsed.records, &stage.config.exclude_languages);
    stage.note("captions", records.len());
    Ok(records)
}

/// Tagged captions joined to their records, in caption-file order.
fn load_tagged(stage: &mut Stage, captions: &[CaptionRecord]) -> Result<Vec<TaggedCaption>, CliError> {
    let path = need(stage.name(), "tagged", &stage.config.tagged)?.to_path_buf();
    let parsed = parse_conllu(&stage.input("tagged", &path)?);
    log_rejects(stage.name(), "tagged", &parsed.rejects);
    let excluded = &stage.config.exclude_languages;
    let sentences = parsed
        .records
        .into_iter()
        .filter(|t| !excluded.contains(&t.record.language))
        .collect();
    let (mut joined, rejects) = join_captions(sentences, captions);
    for (key, reason) in &rejects {
        log::warn!("{}: tagged sentence {key}: {reason}", stage.name());
    }
    stage.note("tagged_rejects", parsed.rejects.len() + rejects.len());
    let order: HashMap<_, usize> = captions.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    joined.sort_by_key(|t| order[&t.key()]);
    let untagged = captions.len() - joined.len();
    if untagged > 0 {
        log::warn!("{}: {untagged} captions have no tagged sentence", stage.name());
    }
    stage.note("untagged_captions", untagged);
    Ok(joined)
}

fn load_presence(
    stage: &mut Stage,
    inventory: &SynsetInventory,
) -> Result<BTreeMap<String, BTreeSet<String>>, CliError> {
    let path = need(stage.name(), "presence", &stage.config.presence)?.to_path_buf();
    let roots = inventory
        .roots()
        .iter()
        .map(|r| r.lemma_key().to_string())
        .collect();
    let (map, rejects) = presence_map(parse_presence(&stage.input("presence", &path)?), &roots);
    log_rejects(stage.name(), "presence", &rejects);
    stage.note("presence_rejects", rejects.len());
    Ok(map)
}

fn load_filtered(stage: &mut Stage, tree: &SynsetTree) -> Result<Vec<FilteredResult>, CliError> {
    let text = stage.artifact(FILTERED, "filter")?;
    Ok(parse_filtered_results(tree, &text)?)
}

pub fn build_ontology(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("build-ontology", config);
    let dir = need("build-ontology", "wordnet_dir", &config.wordnet_dir)?;
    let files = ["index.noun", "data.noun", "noun.exc"].map(|f| dir.join(f));
    for f in &files {
        stage.input(
            &format!("wordnet/{}", f.file_name().unwrap().to_string_lossy()),
            f,
        )?;
    }
    let tree = parse_wordnet(&files[0], &files[1], &files[2])?;
    let edits = match &config.edit_script {
        None => parse_edit_script(DEFAULT_EDIT_SCRIPT).expect("built-in script parses"),
        Some(None) => Vec::new(),
        Some(Some(path)) => {
            let text = stage.input("edit_script", path)?;
            parse_edit_script(&text).map_err(|(line, message)| Error::Parse {
                file: path.clone(),
                line,
                message,
            })?
        }
    };
    let parsed = tree.len();
    let tree = tree.apply_edits(&edits)?;
    stage.param(
        "edits",
        if config.edit_script.is_none() {
            "built-in"
        } else {
            "file"
        },
    );
    stage.note("synsets_parsed", parsed);
    stage.note("synsets", tree.len());
    stage.note("edits_applied", edits.len());
    stage.write(ONTOLOGY, &tree.to_json())?;
    stage.finish()?;
    println!("{} synsets after {} edits", tree.len(), edits.len());
    Ok(())
}

pub fn select(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("select-inventory", config);
    let tree = load_tree(&mut stage)?;
    let captions = load_captions(&mut stage)?;
    let tagged = load_tagged(&mut stage, &captions)?;
    let candidates = match &config.roots {
        Some(path) => parse_root_candidates(&tree, &stage.input("roots", path)?)?,
        None => parse_root_candidates(&tree, &DEFAULT_ROOTS.join("\n"))?,
    };
    let thresholds = Thresholds {
        root_min_count: config.root_min_count,
        explicit_min_count: config.explicit_min_count,
    };
    stage.param("root_min_count", thresholds.root_min_count);
    stage.param("explicit_min_count", thresholds.explicit_min_count);
    stage.param("exclude_languages", &config.exclude_languages);

    let counts = bootstrap_counts(&tree, &tagged)?;
    let inventory = select_inventory(&tree, &counts, &candidates, thresholds)?;
    let mut rows: Vec<(&SynsetId, u64, u64)> = counts
        .subtree_counts()
        .iter()
        .map(|(id, &sub)| (id, counts.direct(id), sub))
        .collect();
    rows.sort();
    let mut table = String::from("synset\tdirect\tsubtree\n");
    for (id, direct, sub) in rows {
        let _ = writeln!(table, "{id}\t{direct}\t{sub}");
    }
    let roles = [SynsetRole::Root, SynsetRole::Explicit, SynsetRole::Implicit].map(|r| inventory.count(r));
    stage.note("roots", roles[0]);
    stage.note("explicit", roles[1]);
    stage.note("implicit", roles[2]);
    stage.write(INVENTORY, &inventory.to_tsv())?;
    stage.write("instantiation_counts.tsv", &table)?;
    stage.finish()?;
    println!(
        "{} synsets ({} root, {} explicit, {} implicit)",
        inventory.len(),
        roles[0],
        roles[1],
        roles[2]
    );
    Ok(())
}

pub fn extract(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("extract", config);
    let tree = load_tree(&mut stage)?;
    let inventory = load_inventory(&mut stage, &tree)?;
    let captions = load_captions(&mut stage)?;
    let tagged = load_tagged(&mut stage, &captions)?;
    let remote;
    let scorer: &dyn DisambiguationScorer = match &config.scorer {
        Scorer::Fallback => {
            stage.param("scorer", "fallback");
            &FallbackScorer
        }
        Scorer::Remote(url) => {
            remote = RemoteScorer::new(url, Duration::from_secs(config.scorer_timeout));
            stage.param("scorer", url);
            match remote.health() {
                Ok(model) => stage.note("model_id", model),
                Err(e) => {
                    log::warn!("extract: scoring service not ready ({e}); ambiguous phrases fall back to the first sense");
                    stage.note("model_id", Value::Null);
                }
            }
            &remote
        }
    };
    let results = Extractor::new(&tree, &inventory, scorer).extract_all(&tagged);
    let mut lines = String::new();
    let mut degraded = String::new();
    let (mut mentions, mut degradations) = (0, 0);
    for r in &results {
        lines.push_str(&r.result.to_json_line());
        lines.push('\n');
        mentions += r.result.mentions.len();
        for d in &r.degradations {
            degraded.push_str(&json_line(d));
            degraded.push('\n');
            degradations += 1;
        }
    }
    stage.note("mentions", mentions);
    stage.note("degradations", degradations);
    stage.write(EXTRACTIONS, &lines)?;
    stage.write("degradations.jsonl", &degraded)?;
    stage.finish()?;
    println!(
        "{} captions, {mentions} mentions, {degradations} degraded",
        results.len()
    );
    Ok(())
}

pub fn filter_stage(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("filter", config);
    let tree = load_tree(&mut stage)?;
    let inventory = load_inventory(&mut stage, &tree)?;
    let extractions = parse_extraction_results(&tree, &stage.artifact(EXTRACTIONS, "extract")?)?;
    let presence = load_presence(&mut stage, &inventory)?;
    stage.param("missing_presence", format!("{:?}", config.missing_presence));
    let mut out = String::new();
    let (mut before, mut after) = (0, 0);
    for r in &extractions {
        let f = filter(
            r,
            presence.get(&r.caption_key.image_id),
            &inventory,
            config.missing_presence,
        )?;
        before += r.closure.len();
        after += f.closure.len();
        out.push_str(&f.to_json_line());
        out.push('\n');
    }
    stage.note("synsets_before", before);
    stage.note("synsets_after", after);
    stage.write(FILTERED, &out)?;
    stage.finish()?;
    println!("kept {after} of {before} extracted synsets");
    Ok(())
}

pub fn validate_stage(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("validate", config);
    let tree = load_tree(&mut stage)?;
    let inventory = load_inventory(&mut stage, &tree)?;
    let filtered = load_filtered(&mut stage, &tree)?;
    let path = need("validate", "gold", &config.gold)?.to_path_buf();
    let gold = parse_gold(&stage.input("gold", &path)?);
    log_rejects("validate", "gold", &gold.rejects);
    let gold: BTreeMap<_, _> = gold
        .records
        .into_iter()
        .map(|g| (g.caption_key, g.synsets))
        .collect();
    let gold = close_gold(&tree, &inventory, &gold)?;
    let predicted: BTreeMap<_, _> = filtered.into_iter().map(|f| (f.caption_key, f.closure)).collect();
    let report = validate(&predicted, &gold);
    stage.write("validation.json", &pretty(&report))?;
    stage.write("validation.txt", &report.to_table())?;
    stage.finish()?;
    println!("precision {:.4} recall {:.4}", report.precision, report.recall);
    Ok(())
}

struct Saliency {
    tree: SynsetTree,
    inventory: SynsetInventory,
    tensor: SaliencyTensor,
    global: GlobalSaliency,
}

fn load_saliency(stage: &mut Stage) -> Result<Saliency, CliError> {
    let tree = load_tree(stage)?;
    let inventory = load_inventory(stage, &tree)?;
    let filtered = load_filtered(stage, &tree)?;
    let captions = load_captions(stage)?;
    let presence = load_presence(stage, &inventory)?;
    let index = CaptionIndex::from_records(&captions);
    let tensor = build_tensor(&filtered, &inventory, &index)?;
    let global = global_saliency(&tensor, &presence, &inventory)?;
    Ok(Saliency {
        tree,
        inventory,
        tensor,
        global,
    })
}

pub fn analyze_saliency(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("analyze saliency", config);
    let s = load_saliency(&mut stage)?;
    let distance = saliency_distance_matrix(&s.tensor)?;
    let spread = saliency_spread(&s.global, config.spread_weighting);
    stage.param("spread_weighting", config.spread_weighting);
    stage.note("languages", s.tensor.languages());
    stage.note("entities", s.tensor.entities().len());
    stage.note("images", s.tensor.images().len());
    stage.write("tensor.csv", &tables::tensor_csv(&s.tensor))?;
    stage.write(DISTANCE, &tables::distance_matrix_csv(&distance))?;
    stage.write("global_saliency.csv", &tables::global_saliency_csv(&s.global))?;
    stage.write("spread.csv", &tables::spread_csv(&spread))?;
    stage.finish()?;
    println!(
        "{} languages x {} entities x {} images",
        s.tensor.languages().len(),
        s.tensor.entities().len(),
        s.tensor.images().len()
    );
    Ok(())
}

pub fn analyze_mantel(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("analyze mantel", config);
    if config.typology.is_empty() {
        return Err(CliError::Config(vec![
            "`analyze mantel` needs `typology` in the config".into(),
        ]));
    }
    let dpath = config.output_dir.join(DISTANCE);
    let saliency = parse_distance_matrix(&stage.artifact(DISTANCE, "analyze saliency")?).map_err(
        |(line, message)| Error::Parse {
            file: dpath,
            line,
            message,
        },
    )?;
    stage.param("seed", config.seed);
    stage.param("permutations", config.permutations);
    let mut results = Vec::new();
    for path in &config.typology {
        let name = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        let matrix = parse_distance_matrix(&stage.input(&format!("typology/{name}"), path)?).map_err(
            |(line, message)| Error::Parse {
                file: path.clone(),
                line,
                message,
            },
        )?;
        let c = correlate_typology(&saliency, &matrix, config.permutations, config.seed)?;
        println!("{name}: r = {:.4}, p = {:.4}", c.mantel.r, c.mantel.p);
        results.push(json!({ "typology": name, "result": c }));
    }
    stage.write("mantel.json", &pretty(&results))?;
    stage.finish()?;
    Ok(())
}

/// Entity selection for `analyze compare`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntitySet {
    Roots,
    All,
    /// Explicit synsets below the given synset.
    Under(String),
}

impl std::str::FromStr for EntitySet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "roots" => Ok(Self::Roots),
            "all" => Ok(Self::All),
            _ => s
                .strip_prefix("under:")
                .map(|k| Self::Under(k.to_string()))
                .ok_or_else(|| format!("expected roots, all or under:<synset>, got `{s}`")),
        }
    }
}

pub fn analyze_compare(
    config: &PipelineConfig,
    l: &str,
    k: &str,
    entities: &EntitySet,
) -> Result<(), CliError> {
    let mut stage = Stage::new("analyze compare", config);
    let s = load_saliency(&mut stage)?;
    let chosen: Vec<SynsetId> = match entities {
        EntitySet::Roots => s.inventory.roots().iter().cloned().collect(),
        EntitySet::All => s.tensor.entities().to_vec(),
        EntitySet::Under(key) => {
            let top = s.tree.id(key)?;
            let mut v = Vec::new();
            for (id, role) in s.inventory.entries() {
                if *role == SynsetRole::Explicit && s.tree.is_descendant(id, &top)? {
                    v.push(id.clone());
                }
            }
            v
        }
    };
    if chosen.is_empty() {
        return Err(CliError::Usage {
            usage: format!("no inventory synsets selected by {entities:?}"),
        });
    }
    stage.param("languages", [l, k]);
    stage.param("entities", format!("{entities:?}"));
    stage.param("alpha", config.alpha);
    stage.param("exact_cutoff", config.exact_cutoff);
    let rows = compare_languages(
        &s.tensor,
        &s.global,
        l,
        k,
        &chosen,
        config.alpha,
        config.exact_cutoff,
    )?;
    let significant = rows.iter().filter(|r| r.significant).count();
    stage.write(&format!("compare_{l}_{k}.csv"), &tables::comparison_csv(&rows))?;
    stage.finish()?;
    println!("{} entities compared, {significant} significant", rows.len());
    Ok(())
}

pub fn analyze_granularity(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("analyze granularity", config);
    let tree = load_tree(&mut stage)?;
    let filtered = load_filtered(&mut stage, &tree)?;
    let hist = depth_histogram(&filtered, &tree)?;
    let (lo, hi) = config.depth_window;
    stage.param("depth_window", [lo, hi]);
    let summary = hist.summary(lo, hi);
    stage.write("depth_histogram.csv", &tables::histogram_csv(&hist))?;
    stage.write("depth_summary.json", &pretty(&summary))?;
    stage.finish()?;
    let concentrated = summary.iter().filter(|s| s.concentrated).count();
    println!(
        "{concentrated} of {} languages concentrated in depths {lo}-{hi}",
        summary.len()
    );
    Ok(())
}

pub fn analyze_counts(config: &PipelineConfig) -> Result<(), CliError> {
    let mut stage = Stage::new("analyze counts", config);
    let tree = load_tree(&mut stage)?;
    let filtered = load_filtered(&mut stage, &tree)?;
    let path = need("analyze counts", "images", &config.images)?.to_path_buf();
    let meta = parse_image_meta(&stage.input("images", &path)?);
    log_rejects("analyze counts", "images", &meta.rejects);
    let meta: BTreeMap<String, String> = meta.records.into_iter().map(|m| (m.image_id, m.locale)).collect();
    let counts = entity_counts(&filtered, &meta)?;
    let pearson = match home_abroad_correlation(&counts) {
        Ok(p) => json!({ "r": p.r, "p": p.p, "n": p.n }),
        Err(e) => {
            log::warn!("analyze counts: home/abroad correlation not computed: {e}");
            json!({ "error": e.to_string() })
        }
    };
    let locales: BTreeSet<&String> = meta.values().collect();
    let mut by_locale = BTreeMap::new();
    for locale in locales {
        by_locale.insert(locale.clone(), per_locale_counts(&filtered, &meta, locale)?);
    }
    stage.write("counts.csv", &tables::counts_csv(&counts))?;
    stage.write(
        "counts.json",
        &pretty(&json!({ "per_language": counts, "home_abroad_pearson": pearson, "by_locale": by_locale })),
    )?;
    stage.finish()?;
    println!("home/abroad correlation: {pearson}");
    Ok(())
}

/// Verifies every manifest and writes `report.json` and `report.md`.
pub fn report(config: &PipelineConfig) -> Result<(), CliError> {
    let out = &config.output_dir;
    let mut stage = Stage::new("report", config);
    let mut manifests = BTreeMap::new();
    let mut stale = Vec::new();
    for name in STAGES {
        let path = manifest_path(out, name);
        if path.exists() {
            let m = read_manifest(&path)?;
            stale.extend(verify(&m, out).into_iter().map(|x| x.to_string()));
            manifests.insert(name, m);
        }
    }
    if !manifests.contains_key("filter") {
        return Err(CliError::MissingArtifact {
            artifact: out.join(FILTERED),
            producer: "filter".into(),
        });
    }
    if !stale.is_empty() {
        return Err(CliError::StaleInputs(stale));
    }

    let mut sections = BTreeMap::new();
    let mut md = String::from("# Saliency report\n\n");
    let read = |stage: &mut Stage, name: &str, producer: &str| -> Result<Option<String>, CliError> {
        if manifests
            .get(producer)
            .is_some_and(|m| m.outputs.contains_key(name))
        {
            stage.artifact(name, producer).map(Some)
        } else {
            Ok(None)
        }
    };

    let _ = writeln!(md, "## Stages\n");
    for name in STAGES {
        let status = if out
            .join(format!("{}.manifest.json", name.replace(' ', "-")))
            .exists()
        {
            "done"
        } else {
            "not run"
        };
        let _ = writeln!(md, "- {name}: {status}");
    }
    md.push('\n');

    if let Some(m) = manifests.get("select-inventory") {
        let n = &m.notes;
        let _ = writeln!(
            md,
            "## Inventory\n\n{} root, {} explicit, {} implicit synsets.\n",
            n["roots"], n["explicit"], n["implicit"]
        );
        sections.insert(
            "inventory",
            json!({ "roots": n["roots"], "explicit": n["explicit"], "implicit": n["implicit"] }),
        );
    }
    if let Some(m) = manifests.get("extract") {
        let n = &m.notes;
        let _ = writeln!(
            md,
            "## Extraction\n\n{} captions, {} mentions, {} degraded disambiguations.\n",
            n["captions"], n["mentions"], n["degradations"]
        );
        sections.insert("extraction", json!({ "captions": n["captions"], "mentions": n["mentions"], "degradations": n["degradations"] }));
    }
    if let Some(text) = read(&mut stage, "validation.json", "validate")? {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage { usage: e.to_string() })?;
        let _ = writeln!(
            md,
            "## Validation\n\nprecision {}, recall {} ({} true positives).\n",
            v["precision"], v["recall"], v["true_positives"]
        );
        sections.insert(
            "validation",
            json!({ "precision": v["precision"], "recall": v["recall"], "true_positives": v["true_positives"] }),
        );
    }
    if let Some(text) = read(&mut stage, DISTANCE, "analyze saliency")? {
        let _ = writeln!(md, "## Saliency distances\n\n```\n{}```\n", text);
        sections.insert("distance_csv", Value::String(text));
    }
    if let Some(text) = read(&mut stage, "spread.csv", "analyze saliency")? {
        let top: Vec<&str> = text.lines().skip(1).take(5).collect();
        let _ = writeln!(
            md,
            "## Largest cross-language spread\n\n```\n{}\n```\n",
            top.join("\n")
        );
        sections.insert("spread_top", json!(top));
    }
    if let Some(text) = read(&mut stage, "mantel.json", "analyze mantel")? {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage { usage: e.to_string() })?;
        let _ = writeln!(md, "## Mantel tests\n");
        for r in v.as_array().into_iter().flatten() {
            let m = &r["result"]["mantel"];
            let _ = writeln!(
                md,
                "- {}: r = {}, p = {}",
                r["typology"].as_str().unwrap_or("?"),
                m["r"],
                m["p"]
            );
        }
        md.push('\n');
        sections.insert("mantel", v);
    }
    if let Some(m) = manifests.get("analyze compare") {
        let names: Vec<String> = m.outputs.keys().cloned().collect();
        for name in names {
            if let Some(text) = read(&mut stage, &name, "analyze compare")? {
                let _ = writeln!(md, "## {name}\n\n```\n{text}```\n");
                sections.insert("compare_csv", Value::String(text));
            }
        }
    }
    if let Some(text) = read(&mut stage, "depth_summary.json", "analyze granularity")? {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage { usage: e.to_string() })?;
        let _ = writeln!(md, "## Granularity\n");
        for s in v.as_array().into_iter().flatten() {
            let _ = writeln!(
                md,
                "- {}: mean depth {}, central mass {}",
                s["language"].as_str().unwrap_or("?"),
                s["mean"],
                s["central_mass"]
            );
        }
        md.push('\n');
        sections.insert("granularity", v);
    }
    if let Some(text) = read(&mut stage, "counts.json", "analyze counts")? {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage { usage: e.to_string() })?;
        let _ = writeln!(
            md,
            "## Entity counts\n\nhome/abroad Pearson: {}\n",
            v["home_abroad_pearson"]
        );
        sections.insert("counts", v);
    }
    let config_hashes: BTreeSet<&str> = manifests.values().map(|m| m.config_hash.as_str()).collect();
    if config_hashes.len() > 1 {
        log::warn!(
            "report: stages were run with {} different configurations",
            config_hashes.len()
        );
    }
    let report = json!({
        "toolkit_version": crate::manifest::VERSION,
        "config_hashes": config_hashes,
        "stages": manifests.keys().collect::<Vec<_>>(),
        "sections": sections,
    });
    stage.write("report.json", &pretty(&report))?;
    stage.write("report.md", &md)?;
    stage.finish()?;
    println!("report written to {}", out.join("report.md").display());
    Ok(())
}
