//! Collocation detection and n-gram merging.
//!
//! A pair `(a, b)` scores
//! `(count(a, b) - min_count) * vocab_size / (count(a) * count(b))`
//! and is merged into `a_b` when its count reaches `min_count` and its score
//! reaches the threshold. Running a second pass over the merged corpus
//! yields tri- and four-grams.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textprep::TokenDoc;

pub const DEFAULT_MIN_COUNT: u64 = 250;
pub const DEFAULT_THRESHOLD: f64 = 10.0;
pub const JOINER: char = '_';

#[derive(Debug, thiserror::Error)]
pub enum PhraseError {
    #[error("cannot fit a phrase model on an empty corpus")]
    EmptyCorpus,
    #[error("token {0:?} is not in the phrase vocabulary")]
    UnknownToken(String),
    #[error("phrase model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("phrase model json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseModel {
    pub min_count: u64,
    pub threshold: f64,
    pub unigram_counts: BTreeMap<String, u64>,
    #[serde(with = "pair_table")]
    pub bigram_counts: BTreeMap<(String, String), u64>,
    pub vocab_size: usize,
}

/// JSON objects need string keys, so pairs are written as `[a, b, count]` rows.
mod pair_table {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<(String, String), u64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(&str, &str, u64)> = map.iter().map(|((a, b), c)| (a.as_str(), b.as_str(), *c)).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(String, String), u64>, D::Error> {
        let rows: Vec<(String, String, u64)> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|(a, b, c)| ((a, b), c)).collect())
    }
}

type Counts = (BTreeMap<String, u64>, BTreeMap<(String, String), u64>);

fn count_doc(doc: &TokenDoc) -> Counts {
    let mut uni = BTreeMap::new();
    let mut bi = BTreeMap::new();
    for t in &doc.tokens {
        *uni.entry(t.clone()).or_insert(0) += 1;
    }
    for w in doc.tokens.windows(2) {
        *bi.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
    }
    (uni, bi)
}

fn merge_counts(mut a: Counts, b: Counts) -> Counts {
    for (k, v) in b.0 {
        *a.0.entry(k).or_insert(0) += v;
    }
    for (k, v) in b.1 {
        *a.1.entry(k).or_insert(0) += v;
    }
    a
}

impl PhraseModel {
    pub fn fit(corpus: &[TokenDoc], min_count: u64, threshold: f64) -> Result<Self, PhraseError> {
        if corpus.is_empty() {
            return Err(PhraseError::EmptyCorpus);
        }
        let (unigram_counts, bigram_counts) = corpus
            .par_iter()
            .map(count_doc)
            .reduce(|| (BTreeMap::new(), BTreeMap::new()), merge_counts);
        Ok(Self {
            min_count,
            threshold,
            vocab_size: unigram_counts.len(),
            unigram_counts,
            bigram_counts,
        })
    }

    pub fn pair_count(&self, a: &str, b: &str) -> u64 {
        self.bigram_counts
            .get(&(a.to_string(), b.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn score(&self, a: &str, b: &str) -> Result<f64, PhraseError> {
        let count_a = *self
            .unigram_counts
            .get(a)
            .ok_or_else(|| PhraseError::UnknownToken(a.to_string()))?;
        let count_b = *self
            .unigram_counts
            .get(b)
            .ok_or_else(|| PhraseError::UnknownToken(b.to_string()))?;
        Ok(raw_score(self.pair_count(a, b), count_a, count_b, self.min_count, self.vocab_size))
    }

    fn merges(&self, a: &str, b: &str) -> bool {
        let pair = self.pair_count(a, b);
        pair > 0 && pair >= self.min_count && self.score(a, b).is_ok_and(|s| s >= self.threshold)
    }

    /// Greedy left-to-right merge; a token produced in this pass is not merged again.
    pub fn transform(&self, doc: &TokenDoc) -> TokenDoc {
        let tokens = &doc.tokens;
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && self.merges(&tokens[i], &tokens[i + 1]) {
                out.push(format!("{}{JOINER}{}", tokens[i], tokens[i + 1]));
                i += 2;
            } else {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
        TokenDoc {
            tokens: out,
            ..doc.clone()
        }
    }

    pub fn transform_corpus(&self, corpus: &[TokenDoc]) -> Vec<TokenDoc> {
        corpus.par_iter().map(|d| self.transform(d)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), PhraseError> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PhraseError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// The collocation score on bare counts.
pub fn raw_score(pair: u64, count_a: u64, count_b: u64, min_count: u64, vocab_size: usize) -> f64 {
    (pair as f64 - min_count as f64) * vocab_size as f64 / (count_a as f64 * count_b as f64)
}

/// Fits and applies `passes` successive models, each on the previous output.
pub fn mine_phrases(
    corpus: &[TokenDoc],
    passes: usize,
    min_count: u64,
    threshold: f64,
) -> Result<(Vec<TokenDoc>, Vec<PhraseModel>), PhraseError> {
    let mut current = corpus.to_vec();
    let mut models = Vec::with_capacity(passes);
    for _ in 0..passes {
        let model = PhraseModel::fit(&current, min_count, threshold)?;
        current = model.transform_corpus(&current);
        models.push(model);
    }
    Ok((current, models))
}

/// Number of original tokens a (possibly merged) token stands for.
pub fn token_mass(token: &str) -> usize {
    1 + token.matches(JOINER).count()
}
