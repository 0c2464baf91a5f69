use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::TokenDoc;

/// Fewer tokens than this gives a low-confidence verdict that defaults to English.
pub const MIN_TOKENS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    English,
    French,
    German,
    Spanish,
    Italian,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::English,
        Language::French,
        Language::German,
        Language::Spanish,
        Language::Italian,
    ];

    fn reference_text(self) -> &'static str {
        match self {
            Language::English => include_str!("../../data/lang/en.txt"),
            Language::French => include_str!("../../data/lang/fr.txt"),
            Language::German => include_str!("../../data/lang/de.txt"),
            Language::Spanish => include_str!("../../data/lang/es.txt"),
            Language::Italian => include_str!("../../data/lang/it.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageCheck {
    pub english: bool,
    pub low_confidence: bool,
    /// Cosine similarity per language, best first.
    pub ranking: Vec<(Language, f64)>,
}

type Profile = HashMap<[char; 3], f64>;

fn profile_of<'a>(words: impl Iterator<Item = &'a str>) -> Profile {
    let mut counts = Profile::new();
    for word in words {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars().flat_map(char::to_lowercase))
            .chain(std::iter::once(' '))
            .collect();
        for w in padded.windows(3) {
            *counts.entry([w[0], w[1], w[2]]).or_insert(0.0) += 1.0;
        }
    }
    counts
}

fn reference_profiles() -> &'static Vec<(Language, Profile)> {
    static PROFILES: OnceLock<Vec<(Language, Profile)>> = OnceLock::new();
    PROFILES.get_or_init(|| {
        Language::ALL
            .iter()
            .map(|&lang| {
                let (words, _) = super::tokenize::scan(lang.reference_text());
                (lang, profile_of(words.iter().map(String::as_str)))
            })
            .collect()
    })
}

fn cosine(a: &Profile, b: &Profile) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, v)| large.get(k).map(|w| v * w))
        .sum();
    let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Character-trigram language identification against the built-in profiles.
pub fn detect_english(doc: &TokenDoc) -> LanguageCheck {
    let profile = profile_of(doc.tokens.iter().map(String::as_str));
    let mut ranking: Vec<(Language, f64)> = reference_profiles()
        .iter()
        .map(|(lang, reference)| (*lang, cosine(&profile, reference)))
        .collect();
    // stable sort keeps the declaration order on exact ties
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    if doc.tokens.len() < MIN_TOKENS {
        return LanguageCheck {
            english: true,
            low_confidence: true,
            ranking,
        };
    }
    LanguageCheck {
        english: ranking[0].0 == Language::English,
        low_confidence: false,
        ranking,
    }
}
