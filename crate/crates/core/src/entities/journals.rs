//! Journal mentions counted through an alias table.

use std::collections::BTreeMap;
use std::path::Path;

use super::{EntityCounts, EntityError, EntityKind};

/// Case-insensitive alias to canonical journal name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalAliases {
    /// Keys are lowercase aliases with single spaces.
    map: BTreeMap<String, String>,
}

fn normalize(alias: &str) -> String {
    alias.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase()
}

impl JournalAliases {
    /// Every canonical name is also an alias of itself.
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self, EntityError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut insert = |alias: &str, canonical: &str| -> Result<(), EntityError> {
            let key = normalize(alias);
            if key.is_empty() {
                return Ok(());
            }
            match map.get(&key) {
                Some(existing) if existing != canonical => Err(EntityError::ConflictingAlias {
                    alias: alias.to_string(),
                    first: existing.clone(),
                    second: canonical.to_string(),
                }),
                _ => {
                    map.insert(key, canonical.to_string());
                    Ok(())
                }
            }
        };
        for (alias, canonical) in pairs {
            insert(&alias, &canonical)?;
            insert(&canonical, &canonical)?;
        }
        Ok(Self { map })
    }

    pub fn bundled() -> Self {
        Self::from_csv_reader(include_str!("../../data/entities/journal_aliases.csv").as_bytes()).expect("bundled aliases")
    }

    pub fn from_csv(path: &Path) -> Result<Self, EntityError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    fn from_csv_reader(r: impl std::io::Read) -> Result<Self, EntityError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut pairs = Vec::new();
        for row in rdr.records() {
            let row = row?;
            pairs.push((row.get(0).unwrap_or("").to_string(), row.get(1).unwrap_or("").to_string()));
        }
        Self::new(pairs)
    }

    pub fn canonical(&self, alias: &str) -> Option<&str> {
        self.map.get(&normalize(alias)).map(String::as_str)
    }

    pub fn alias_map(&self) -> &BTreeMap<String, String> {
        &self.map
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric()
}

/// Counts alias occurrences, longest alias first; text already claimed by a
/// longer match is not counted again.
pub fn count_journals(raw_text: &str, aliases: &JournalAliases) -> Result<EntityCounts, EntityError> {
    let text = normalize_spans(raw_text);
    let bytes = text.as_bytes();
    let mut order: Vec<(&String, &String)> = aliases.map.iter().collect();
    order.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(b.0)));

    // claimed spans: start -> (end, canonical)
    let mut claimed: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
    let mut counts = EntityCounts::new(EntityKind::Journal);
    for (alias, canonical) in order {
        for (start, _) in text.match_indices(alias.as_str()) {
            let end = start + alias.len();
            let first = alias.as_bytes()[0];
            let last = alias.as_bytes()[alias.len() - 1];
            let left_ok = start == 0 || !is_word_byte(bytes[start - 1]) || !is_word_byte(first);
            let right_ok = end == bytes.len() || !is_word_byte(bytes[end]) || !is_word_byte(last);
            if !(left_ok && right_ok) {
                continue;
            }
            let overlap = claimed
                .range(..end)
                .next_back()
                .filter(|(&s, &(e, _))| s < end && e > start)
                .map(|(&s, &(e, c))| (s, e, c));
            match overlap {
                Some((s, e, c)) if s == start && e == end && c != canonical => {
                    return Err(EntityError::ConflictingAlias {
                        alias: alias.clone(),
                        first: c.to_string(),
                        second: canonical.clone(),
                    });
                }
                Some(_) => continue,
                None => {
                    claimed.insert(start, (end, canonical.as_str()));
                    counts.add(canonical, 1);
                }
            }
        }
    }
    counts.alias_map = aliases.map.clone();
    Ok(counts)
}

/// ASCII-lowercases and collapses whitespace runs to one space.
fn normalize_spans(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !in_space {
                out.push(' ');
            }
            in_space = true;
        } else {
            out.push(ch.to_ascii_lowercase());
            in_space = false;
        }
    }
    out
}
