//! Turns extracted plain text into the three corpus stages
//! (raw, lemmatized, cleaned), plus language and readability checks.

mod language;
mod lemma;
mod readability;
mod tokenize;

pub use language::{detect_english, Language, LanguageCheck, MIN_TOKENS};
pub use lemma::lemma;
pub use readability::{count_syllables, flesch_score, ReadabilityScore, FLESCH_BASE};
pub use tokenize::is_word_char;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MIN_TOKEN_LEN: usize = 3;
pub const MAX_TOKEN_LEN: usize = 25;
pub const DEFAULT_MIN_COUNT: u64 = 25;

#[derive(Debug, thiserror::Error)]
pub enum PrepError {
    #[error("expected stage {expected:?}, document {doc_id} is {found:?}")]
    WrongStage {
        doc_id: String,
        expected: Stage,
        found: Stage,
    },
    #[error("corpus mixes stages {0:?} and {1:?}")]
    MixedStages(Stage, Stage),
    #[error("stopword list {path}: {source}")]
    Stopwords {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Lemmatized,
    Cleaned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub doc_id: String,
    pub stage: Stage,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub years_found: Vec<u16>,
}

impl TokenDoc {
    pub fn new(doc_id: impl Into<String>, stage: Stage, tokens: Vec<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            stage,
            tokens,
            years_found: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn expect_stage(&self, expected: Stage) -> Result<(), PrepError> {
        if self.stage == expected {
            Ok(())
        } else {
            Err(PrepError::WrongStage {
                doc_id: self.doc_id.clone(),
                expected,
                found: self.stage,
            })
        }
    }
}

/// Stopword sets plus the adverb filter for words ending in `-ly`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordConfig {
    pub english_stopwords: BTreeSet<String>,
    pub domain_stopwords: BTreeSet<String>,
    pub drop_ly_adverbs: bool,
}

const LY_KEEP: &[&str] = &[
    "apply", "supply", "reply", "family", "anomaly", "monopoly", "oligopoly", "assembly", "rally", "italy",
    "july", "bully", "multiply", "comply", "ally", "butterfly", "jelly", "belly", "holy", "duopoly",
];

impl Default for StopwordConfig {
    fn default() -> Self {
        Self {
            english_stopwords: parse_word_list(include_str!("../../data/stopwords_en.txt")),
            domain_stopwords: parse_word_list(include_str!("../../data/stopwords_domain.txt")),
            drop_ly_adverbs: true,
        }
    }
}

/// One lowercase word per line; blank lines and `#` comments are skipped.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl StopwordConfig {
    pub fn from_files(english: Option<&Path>, domain: Option<&Path>) -> Result<Self, PrepError> {
        let mut cfg = Self::default();
        let read = |p: &Path| {
            fs::read_to_string(p)
                .map(|t| parse_word_list(&t))
                .map_err(|source| PrepError::Stopwords {
                    path: p.display().to_string(),
                    source,
                })
        };
        if let Some(p) = english {
            cfg.english_stopwords = read(p)?;
        }
        if let Some(p) = domain {
            cfg.domain_stopwords = read(p)?;
        }
        Ok(cfg)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.english_stopwords.contains(token)
            || self.domain_stopwords.contains(token)
            || (self.drop_ly_adverbs
                && token.chars().count() >= 6
                && token.ends_with("ly")
                && !LY_KEEP.contains(&token))
    }
}

/// Raw stage: letter runs in order; standalone 4-digit numerals go to `years_found`.
pub fn tokenize(doc_id: &str, text: &str) -> TokenDoc {
    let (tokens, years_found) = tokenize::scan(text);
    TokenDoc {
        doc_id: doc_id.to_string(),
        stage: Stage::Raw,
        tokens,
        years_found,
    }
}

pub fn lemmatize(doc: &TokenDoc) -> Result<TokenDoc, PrepError> {
    doc.expect_stage(Stage::Raw)?;
    Ok(TokenDoc {
        doc_id: doc.doc_id.clone(),
        stage: Stage::Lemmatized,
        tokens: doc
            .tokens
            .iter()
            .map(|t| lemma(t))
            .filter(|t| !t.is_empty())
            .collect(),
        years_found: doc.years_found.clone(),
    })
}

/// Corpus-wide token totals.
pub type TokenCounts = HashMap<String, u64>;

pub fn corpus_counts(corpus: &[TokenDoc]) -> TokenCounts {
    corpus
        .par_iter()
        .map(|doc| {
            let mut local = TokenCounts::new();
            for t in &doc.tokens {
                *local.entry(t.clone()).or_insert(0) += 1;
            }
            local
        })
        .reduce(TokenCounts::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

fn keep_token(token: &str, cfg: &StopwordConfig) -> bool {
    let len = token.chars().count();
    (MIN_TOKEN_LEN..=MAX_TOKEN_LEN).contains(&len)
        && token.chars().all(|c| c.is_alphabetic() && !c.is_uppercase())
        && !cfg.is_stopword(token)
}

/// Drops stopwords, out-of-range lengths and tokens rarer than `min_count`
/// in `counts`. Accepts lemmatized or already-cleaned input.
pub fn clean(doc: &TokenDoc, cfg: &StopwordConfig, counts: &TokenCounts, min_count: u64) -> Result<TokenDoc, PrepError> {
    if doc.stage == Stage::Raw {
        return Err(PrepError::WrongStage {
            doc_id: doc.doc_id.clone(),
            expected: Stage::Lemmatized,
            found: Stage::Raw,
        });
    }
    Ok(TokenDoc {
        doc_id: doc.doc_id.clone(),
        stage: Stage::Cleaned,
        tokens: doc
            .tokens
            .iter()
            .filter(|t| keep_token(t, cfg) && counts.get(t.as_str()).copied().unwrap_or(0) >= min_count)
            .cloned()
            .collect(),
        years_found: doc.years_found.clone(),
    })
}

/// Cleans a whole lemmatized corpus using its own token frequencies.
pub fn clean_corpus(corpus: &[TokenDoc], cfg: &StopwordConfig, min_count: u64) -> Result<Vec<TokenDoc>, PrepError> {
    let counts = corpus_counts(corpus);
    corpus.par_iter().map(|d| clean(d, cfg, &counts, min_count)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub token: String,
    pub count: u64,
    /// Fraction of all tokens in the corpus.
    pub share: f64,
}

impl FrequencyEntry {
    pub fn percent(&self) -> f64 {
        self.share * 100.0
    }
}

/// Token frequencies sorted by descending count, ties alphabetical.
pub fn frequency_table(corpus: &[TokenDoc]) -> Result<Vec<FrequencyEntry>, PrepError> {
    if let Some(first) = corpus.first() {
        if let Some(other) = corpus.iter().find(|d| d.stage != first.stage) {
            return Err(PrepError::MixedStages(first.stage, other.stage));
        }
    }
    let counts: BTreeMap<String, u64> = corpus_counts(corpus).into_iter().collect();
    let total: u64 = counts.values().sum();
    let mut entries: Vec<FrequencyEntry> = counts
        .into_iter()
        .map(|(token, count)| FrequencyEntry {
            token,
            count,
            share: count as f64 / total as f64,
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        let d = tokenize("x", "Pricing in 1987 crashed");
        assert_eq!(d.tokens, toks(&["Pricing", "in", "crashed"]));
        assert_eq!(d.years_found, vec![1987]);
        assert_eq!(d.stage, Stage::Raw);

        assert!(tokenize("e", "").is_empty());
        assert_eq!(tokenize("g", "α-stable Lévy").tokens, toks(&["stable", "Lévy"]));
    }

    #[test]
    fn lemmatize_examples() {
        let raw = TokenDoc::new("a", Stage::Raw, toks(&["models", "priced", "volatilities"]));
        assert_eq!(lemmatize(&raw).unwrap().tokens, toks(&["model", "price", "volatility"]));
        let raw = TokenDoc::new("a", Stage::Raw, toks(&["risk", "Markets"]));
        assert_eq!(lemmatize(&raw).unwrap().tokens, toks(&["risk", "market"]));
        let lem = lemmatize(&raw).unwrap();
        assert!(matches!(lemmatize(&lem), Err(PrepError::WrongStage { .. })));
    }

    #[test]
    fn clean_examples() {
        let cfg = StopwordConfig::default();
        let counts: TokenCounts = [("model".to_string(), 30), ("the".to_string(), 99), ("xx".to_string(), 99)]
            .into_iter()
            .collect();
        let doc = TokenDoc::new("a", Stage::Lemmatized, toks(&["the", "model", "of", "xx"]));
        assert_eq!(clean(&doc, &cfg, &counts, 25).unwrap().tokens, toks(&["model"]));

        let empty = TokenDoc::new("b", Stage::Lemmatized, vec![]);
        assert!(clean(&empty, &cfg, &counts, 25).unwrap().is_empty());

        let long = "a".repeat(26);
        let at_bound = "b".repeat(25);
        let counts: TokenCounts = [(long.clone(), 100), (at_bound.clone(), 100)].into_iter().collect();
        let doc = TokenDoc::new("c", Stage::Lemmatized, vec![long, at_bound.clone()]);
        assert_eq!(clean(&doc, &cfg, &counts, 25).unwrap().tokens, vec![at_bound]);
    }

    #[test]
    fn clean_min_count_and_domain_words() {
        let cfg = StopwordConfig::default();
        let counts: TokenCounts = [("rare", 24), ("theorem", 100), ("http", 100), ("quickly", 100), ("supply", 100)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let doc = TokenDoc::new("a", Stage::Lemmatized, toks(&["rare", "theorem", "http", "quickly", "supply"]));
        assert_eq!(clean(&doc, &cfg, &counts, 25).unwrap().tokens, toks(&["supply"]));
    }

    #[test]
    fn frequency_examples() {
        let corpus = vec![TokenDoc::new("a", Stage::Cleaned, toks(&["aaa", "aaa", "bbb"]))];
        let table = frequency_table(&corpus).unwrap();
        assert_eq!(table[0].token, "aaa");
        assert!((table[0].share - 2.0 / 3.0).abs() < 1e-15);
        assert!(frequency_table(&[]).unwrap().is_empty());

        let mixed = vec![
            TokenDoc::new("a", Stage::Cleaned, vec![]),
            TokenDoc::new("b", Stage::Raw, vec![]),
        ];
        assert!(matches!(frequency_table(&mixed), Err(PrepError::MixedStages(..))));
    }

    #[test]
    fn planted_frequency_share() {
        // "model" once in every 100 tokens
        let mut tokens = Vec::new();
        for i in 0..1000 {
            if i % 100 == 0 {
                tokens.push("model".to_string());
            } else {
                tokens.push(format!("filler{}", i % 7));
            }
        }
        let corpus = vec![TokenDoc::new("a", Stage::Cleaned, tokens)];
        let table = frequency_table(&corpus).unwrap();
        let model = table.iter().find(|e| e.token == "model").unwrap();
        assert!((model.percent() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readability_examples() {
        let s = flesch_score("d", "The cat sat on the mat.");
        assert_eq!((s.words, s.sentences, s.syllables), (6, 1, 6));
        assert!((s.flesch - 116.145).abs() < 1e-9);

        let e = flesch_score("e", "");
        assert_eq!(e.words, 0);
        assert_eq!(e.flesch, FLESCH_BASE);

        // hand count: Prices(2) rose(1) quickly(2). Markets(2) were(1) volatile(3)!
        // 206.835 - 1.015 * 6/2 - 84.6 * 11/6 = 48.69
        let t = flesch_score("t", "Prices rose quickly. Markets were volatile!");
        assert_eq!((t.words, t.sentences, t.syllables), (6, 2, 11));
        assert!((t.flesch - 48.69).abs() < 0.01);
    }

    #[test]
    fn language_examples() {
        let en = tokenize(
            "en",
            "We study a stochastic volatility model for option pricing and show that the \
             calibration to market quotes is stable. The results suggest that the hedging error \
             decreases when the rebalancing frequency is increased, which is consistent with what \
             practitioners observe on the trading desk every day.",
        );
        let check = detect_english(&en);
        assert!(check.english && !check.low_confidence, "{check:?}");

        let fr = tokenize(
            "fr",
            "Nous étudions un modèle de volatilité stochastique pour l'évaluation des options et \
             nous montrons que la calibration sur les prix du marché est stable. Les résultats \
             suggèrent que l'erreur de couverture diminue lorsque la fréquence de rééquilibrage \
             augmente, ce qui est conforme à ce que les praticiens observent chaque jour.",
        );
        let check = detect_english(&fr);
        assert!(!check.english, "{check:?}");
        assert_eq!(check.ranking[0].0, Language::French);

        let short = tokenize("s", "one two three four five");
        let check = detect_english(&short);
        assert!(check.english && check.low_confidence);
    }
}
