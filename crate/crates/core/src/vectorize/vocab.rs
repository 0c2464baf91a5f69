use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::textprep::TokenDoc;

/// Token/index table with corpus and document frequencies.
///
/// Tokens are indexed in lexicographic order, so two vocabularies built from
/// the same corpus are identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    corpus_counts: Vec<u64>,
    doc_freq: Vec<u64>,
    total_docs: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    corpus_counts: Vec<u64>,
    doc_freq: Vec<u64>,
    total_docs: u64,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Self::from_parts(r.tokens, r.corpus_counts, r.doc_freq, r.total_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            tokens: v.tokens,
            corpus_counts: v.corpus_counts,
            doc_freq: v.doc_freq,
            total_docs: v.total_docs,
        }
    }
}

impl Vocabulary {
    /// Builds the vocabulary of tokens occurring at least `min_count` times.
    pub fn build(corpus: &[TokenDoc], min_count: u64) -> Self {
        Self::build_from_tokens(corpus.iter().map(|d| d.tokens.as_slice()), min_count)
    }

    pub fn build_from_tokens<'a>(docs: impl Iterator<Item = &'a [String]>, min_count: u64) -> Self {
        let mut stats: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        let mut total_docs = 0;
        for tokens in docs {
            total_docs += 1;
            let mut seen = HashSet::new();
            for t in tokens {
                let e = stats.entry(t.as_str()).or_insert((0, 0));
                e.0 += 1;
                if seen.insert(t.as_str()) {
                    e.1 += 1;
                }
            }
        }
        let kept: Vec<_> = stats.into_iter().filter(|(_, (c, _))| *c >= min_count).collect();
        Self::from_parts(
            kept.iter().map(|(t, _)| t.to_string()).collect(),
            kept.iter().map(|(_, (c, _))| *c).collect(),
            kept.iter().map(|(_, (_, d))| *d).collect(),
            total_docs,
        )
    }

    pub fn from_parts(tokens: Vec<String>, corpus_counts: Vec<u64>, doc_freq: Vec<u64>, total_docs: u64) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            tokens,
            index,
            corpus_counts,
            doc_freq,
            total_docs,
        }
    }

    /// Keeps only the indices accepted by `keep`, preserving order.
    pub fn retain(&self, keep: impl Fn(usize) -> bool) -> Self {
        let ids: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        Self::from_parts(
            ids.iter().map(|&i| self.tokens[i].clone()).collect(),
            ids.iter().map(|&i| self.corpus_counts[i]).collect(),
            ids.iter().map(|&i| self.doc_freq[i]).collect(),
            self.total_docs,
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, i: usize) -> u64 {
        self.corpus_counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.corpus_counts
    }

    pub fn doc_freq(&self, i: usize) -> u64 {
        self.doc_freq[i]
    }

    pub fn total_docs(&self) -> u64 {
        self.total_docs
    }

    /// `ln(total_docs / doc_freq)`.
    pub fn idf(&self, i: usize) -> f64 {
        (self.total_docs as f64 / self.doc_freq[i] as f64).ln()
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.get(t)).collect()
    }
}
