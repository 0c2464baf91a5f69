//! Cited author surnames and journal names mined from full texts.

mod journals;
mod persons;

pub use journals::{count_journals, JournalAliases};
pub use persons::{exclude_names, extract_person_candidates, filter_first_names, Candidate, NameLexicon};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textprep::parse_word_list;

pub const DEFAULT_MIN_OCCURRENCES: u64 = 500;
pub const DEFAULT_TOP_AUTHORS: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum EntityError {
    #[error("alias {alias:?} maps to both {first:?} and {second:?}")]
    ConflictingAlias { alias: String, first: String, second: String },
    #[error("first-name lexicon is empty")]
    EmptyLexicon,
    #[error("entity io: {0}")]
    Io(#[from] std::io::Error),
    #[error("entity csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Person,
    Journal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCounts {
    pub kind: EntityKind,
    pub counts: BTreeMap<String, u64>,
    /// Alias to canonical name; empty for persons.
    pub alias_map: BTreeMap<String, String>,
}

impl EntityCounts {
    pub fn new(kind: EntityKind) -> Self {
        Self {
            kind,
            counts: BTreeMap::new(),
            alias_map: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, n: u64) {
        if n > 0 {
            *self.counts.entry(name.to_string()).or_insert(0) += n;
        }
    }

    pub fn merge(mut self, other: EntityCounts) -> Self {
        for (k, v) in other.counts {
            self.add(&k, v);
        }
        self.alias_map.extend(other.alias_map);
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Entries with strictly more than `min_occurrences`, most frequent first,
/// ties alphabetical, at most `top_n`.
pub fn rank_entities(counts: &EntityCounts, min_occurrences: u64, top_n: usize) -> Vec<(String, u64)> {
    let mut ranked: Vec<(String, u64)> = counts
        .counts
        .iter()
        .filter(|(_, &c)| c > min_occurrences)
        .map(|(k, &c)| (k.clone(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    ranked
}

/// Writes `name,count` rows.
pub fn write_ranking(path: &Path, ranked: &[(String, u64)]) -> Result<(), EntityError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "count"])?;
    for (name, count) in ranked {
        w.write_record([name.as_str(), &count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub struct EntityResources {
    pub lexicon: NameLexicon,
    pub aliases: JournalAliases,
    pub excluded: BTreeSet<String>,
}

impl EntityResources {
    pub fn bundled() -> Self {
        Self {
            lexicon: NameLexicon::bundled(),
            aliases: JournalAliases::bundled(),
            excluded: parse_word_list(include_str!("../../data/entities/exclude_names.txt")),
        }
    }

    pub fn from_files(
        first_names: Option<&Path>,
        aliases: Option<&Path>,
        excluded: Option<&Path>,
    ) -> Result<Self, EntityError> {
        let mut r = Self::bundled();
        if let Some(p) = first_names {
            r.lexicon = NameLexicon::from_file(p)?;
        }
        if let Some(p) = aliases {
            r.aliases = JournalAliases::from_csv(p)?;
        }
        if let Some(p) = excluded {
            r.excluded = parse_word_list(&std::fs::read_to_string(p)?);
        }
        Ok(r)
    }
}

/// Surname and journal counts over a set of raw texts.
pub fn mine_entities(texts: &[String], res: &EntityResources) -> Result<(EntityCounts, EntityCounts), EntityError> {
    let per_doc: Vec<(EntityCounts, EntityCounts)> = texts
        .par_iter()
        .map(|text| {
            let cands = filter_first_names(&extract_person_candidates(text), &res.lexicon);
            let cands = exclude_names(&cands, &res.excluded);
            let mut persons = EntityCounts::new(EntityKind::Person);
            for c in &cands {
                persons.add(&c.name, 1);
            }
            Ok((persons, count_journals(text, &res.aliases)?))
        })
        .collect::<Result<_, EntityError>>()?;
    Ok(per_doc.into_iter().fold(
        (EntityCounts::new(EntityKind::Person), EntityCounts::new(EntityKind::Journal)),
        |(p, j), (dp, dj)| (p.merge(dp), j.merge(dj)),
    ))
}
