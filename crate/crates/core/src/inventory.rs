//! Selection of the entity inventory: root synsets, explicit synsets
//! mapped often enough, and the implicit synsets linking the two.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::wordnet::{SynsetId, SynsetTree};

/// The 25 visually identifiable top-level categories used as default root
/// candidates.
pub const DEFAULT_ROOTS: [&str; 25] = [
    "animal.n.01",
    "bag.n.01",
    "body_of_water.n.01",
    "body_part.n.01",
    "building.n.01",
    "clothing.n.01",
    "electronic_equipment.n.01",
    "food.n.01",
    "furniture.n.01",
    "hand_tool.n.01",
    "home_appliance.n.01",
    "jewelry.n.01",
    "kitchen_utensil.n.01",
    "mountain.n.01",
    "musical_instrument.n.01",
    "person.n.01",
    "plant.n.02",
    "plaything.n.01",
    "sky.n.01",
    "sun.n.01",
    "tableware.n.01",
    "timepiece.n.01",
    "vehicle.n.01",
    "weapon.n.01",
    "writing_implement.n.01",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynsetRole {
    Root,
    Explicit,
    Implicit,
}

impl fmt::Display for SynsetRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynsetRole::Root => "root",
            SynsetRole::Explicit => "explicit",
            SynsetRole::Implicit => "implicit",
        })
    }
}

impl FromStr for SynsetRole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "root" => Ok(SynsetRole::Root),
            "explicit" => Ok(SynsetRole::Explicit),
            "implicit" => Ok(SynsetRole::Implicit),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub root_min_count: u64,
    pub explicit_min_count: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            root_min_count: 100,
            explicit_min_count: 100,
        }
    }
}

/// Per-synset instantiation counts.
///
/// `direct` counts phrases resolved to the synset itself; `subtree` counts
/// phrases resolved to the synset or any of its descendants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstantiationCounts {
    direct: HashMap<SynsetId, u64>,
    subtree: HashMap<SynsetId, u64>,
}

impl InstantiationCounts {
    pub fn direct(&self, id: &SynsetId) -> u64 {
        self.direct.get(id).copied().unwrap_or(0)
    }

    pub fn subtree(&self, id: &SynsetId) -> u64 {
        self.subtree.get(id).copied().unwrap_or(0)
    }

    pub fn direct_counts(&self) -> &HashMap<SynsetId, u64> {
        &self.direct
    }

    pub fn subtree_counts(&self) -> &HashMap<SynsetId, u64> {
        &self.subtree
    }

    /// Associative merge of two shards.
    pub fn merge(mut self, other: InstantiationCounts) -> Self {
        for (id, n) in other.direct {
            *self.direct.entry(id).or_default() += n;
        }
        for (id, n) in other.subtree {
            *self.subtree.entry(id).or_default() += n;
        }
        self
    }
}

/// Counts each resolved mapping for its synset and every hypernym ancestor.
pub fn count_instantiations<'a, I>(tree: &SynsetTree, mappings: I) -> Result<InstantiationCounts>
where
    I: IntoIterator<Item = (&'a str, &'a SynsetId)>,
{
    let mut counts = InstantiationCounts::default();
    let mut closures: HashMap<SynsetId, Vec<SynsetId>> = HashMap::new();
    for (_phrase, id) in mappings {
        if !closures.contains_key(id) {
            let ancestors = tree.ancestors(id)?;
            closures.insert(id.clone(), ancestors);
        }
        *counts.direct.entry(id.clone()).or_default() += 1;
        *counts.subtree.entry(id.clone()).or_default() += 1;
        for a in &closures[id] {
            *counts.subtree.entry(a.clone()).or_default() += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynsetInventory {
    entries: BTreeMap<SynsetId, SynsetRole>,
    roots: BTreeSet<SynsetId>,
    root_of: BTreeMap<SynsetId, SynsetId>,
    pub thresholds: Thresholds,
}

pub fn select_inventory(
    tree: &SynsetTree,
    counts: &InstantiationCounts,
    root_candidates: &[SynsetId],
    thresholds: Thresholds,
) -> Result<SynsetInventory> {
    for c in root_candidates {
        if !tree.contains(c) {
            return Err(Error::UnknownSynset(c.to_string()));
        }
    }
    let qualifying: Vec<&SynsetId> = root_candidates
        .iter()
        .filter(|c| counts.subtree(c) >= thresholds.root_min_count)
        .collect();
    let mut roots = BTreeSet::new();
    for c in &qualifying {
        let ancestors = tree.ancestors(c)?;
        if !qualifying.iter().any(|q| ancestors.contains(q)) {
            roots.insert((*c).clone());
        }
    }

    let root_set = roots.iter().cloned().collect();
    let mut explicit: Vec<(&SynsetId, SynsetId)> = Vec::new();
    let mut direct: Vec<(&SynsetId, &u64)> = counts.direct.iter().collect();
    direct.sort();
    for (id, n) in direct {
        if *n < thresholds.explicit_min_count || roots.contains(id) {
            continue;
        }
        if let Some(root) = tree.root_of(id, &root_set)? {
            explicit.push((id, root));
        }
    }

    let mut inventory = SynsetInventory {
        entries: roots.iter().map(|r| (r.clone(), SynsetRole::Root)).collect(),
        root_of: roots.iter().map(|r| (r.clone(), r.clone())).collect(),
        roots,
        thresholds,
    };
    for (id, root) in &explicit {
        inventory.entries.insert((*id).clone(), SynsetRole::Explicit);
        inventory.root_of.insert((*id).clone(), root.clone());
    }
    for (id, root) in &explicit {
        let path = tree
            .path_between(root, id)?
            .ok_or_else(|| Error::Integrity(format!("{root} is not an ancestor of {id}")))?;
        for node in &path[1..path.len() - 1] {
            inventory
                .entries
                .entry(node.clone())
                .or_insert(SynsetRole::Implicit);
            inventory
                .root_of
                .entry(node.clone())
                .or_insert_with(|| root.clone());
        }
    }
    Ok(inventory)
}

impl SynsetInventory {
    /// Rebuilds an inventory from stored roles, re-deriving each entry's
    /// root and checking the structural invariants.
    pub fn from_roles(
        tree: &SynsetTree,
        roles: BTreeMap<SynsetId, SynsetRole>,
        thresholds: Thresholds,
    ) -> Result<Self> {
        let roots: BTreeSet<SynsetId> = roles
            .iter()
            .filter(|(_, r)| **r == SynsetRole::Root)
            .map(|(id, _)| id.clone())
            .collect();
        let root_set = roots.iter().cloned().collect();
        let mut root_of = BTreeMap::new();
        for id in roles.keys() {
            let root = tree
                .root_of(id, &root_set)?
                .ok_or_else(|| Error::Integrity(format!("inventory entry {id} has no root ancestor")))?;
            if roots.contains(id) && root != *id {
                return Err(Error::Integrity(format!("root {id} lies under root {root}")));
            }
            root_of.insert(id.clone(), root);
        }
        let inventory = Self {
            entries: roles,
            roots,
            root_of,
            thresholds,
        };
        inventory.check_path_closure(tree)?;
        Ok(inventory)
    }

    fn check_path_closure(&self, tree: &SynsetTree) -> Result<()> {
        for (id, role) in &self.entries {
            if *role != SynsetRole::Explicit {
                continue;
            }
            let root = &self.root_of[id];
            let path = tree
                .path_between(root, id)?
                .ok_or_else(|| Error::Integrity(format!("{root} is not an ancestor of {id}")))?;
            if let Some(missing) = path.iter().find(|n| !self.entries.contains_key(n)) {
                return Err(Error::Integrity(format!(
                    "{missing} lies between {root} and {id} but is not in the inventory"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<SynsetId, SynsetRole> {
        &self.entries
    }

    pub fn roots(&self) -> &BTreeSet<SynsetId> {
        &self.roots
    }

    pub fn contains(&self, id: &SynsetId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn role(&self, id: &SynsetId) -> Option<SynsetRole> {
        self.entries.get(id).copied()
    }

    pub fn root(&self, id: &SynsetId) -> Option<&SynsetId> {
        self.root_of.get(id)
    }

    pub fn count(&self, role: SynsetRole) -> usize {
        self.entries.values().filter(|r| **r == role).count()
    }

    /// Looks an entry up by key.
    pub fn by_key(&self, key: &str) -> Option<&SynsetId> {
        self.entries.keys().find(|id| id.lemma_key() == key)
    }

    /// `id` and its ancestors restricted to inventory members, sorted.
    pub fn closure(&self, tree: &SynsetTree, id: &SynsetId) -> Result<BTreeSet<SynsetId>> {
        Ok(std::iter::once(id.clone())
            .chain(tree.ancestors(id)?)
            .filter(|s| self.contains(s))
            .collect())
    }

    /// The most specific inventory member among `id` and its ancestors.
    pub fn deepest_member(&self, tree: &SynsetTree, id: &SynsetId) -> Result<Option<SynsetId>> {
        let mut best: Option<(usize, SynsetId)> = None;
        for s in std::iter::once(id.clone()).chain(tree.ancestors(id)?) {
            if !self.contains(&s) {
                continue;
            }
            let d = tree.depth(&s)?;
            if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                best = Some((d, s));
            }
        }
        Ok(best.map(|(_, s)| s))
    }

    /// `synset_id<TAB>role` lines, preceded by the thresholds as comments.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "# root_min_count = {}\n# explicit_min_count = {}\n",
            self.thresholds.root_min_count, self.thresholds.explicit_min_count
        );
        for (id, role) in &self.entries {
            out.push_str(&format!("{id}\t{role}\n"));
        }
        out
    }

    pub fn from_tsv(tree: &SynsetTree, text: &str) -> Result<Self> {
        let mut roles = BTreeMap::new();
        let mut thresholds = Thresholds::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    let value = v.trim().parse().ok();
                    match (k.trim(), value) {
                        ("root_min_count", Some(v)) => thresholds.root_min_count = v,
                        ("explicit_min_count", Some(v)) => thresholds.explicit_min_count = v,
                        _ => {}
                    }
                }
                continue;
            }
            let (key, role) = line.split_once('\t').ok_or_else(|| Error::Parse {
                file: "inventory".into(),
                line: n + 1,
                message: "expected `synset_id<TAB>role`".into(),
            })?;
            let role: SynsetRole = role.trim().parse().map_err(|m: String| Error::Parse {
                file: "inventory".into(),
                line: n + 1,
                message: m,
            })?;
            roles.insert(tree.id(key.trim())?, role);
        }
        Self::from_roles(tree, roles, thresholds)
    }
}

pub fn write_inventory(inventory: &SynsetInventory, path: &Path) -> Result<()> {
    fs::write(path, inventory.to_tsv()).map_err(|e| Error::io(path, e))
}

pub fn read_inventory(tree: &SynsetTree, path: &Path) -> Result<SynsetInventory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SynsetInventory::from_tsv(tree, &text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::parse(path, line, message),
        other => other,
    })
}

/// Reads one synset key per line; `#` comments and blank lines ignored.
pub fn parse_root_candidates(tree: &SynsetTree, text: &str) -> Result<Vec<SynsetId>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|key| tree.id(key))
        .collect()
}
