use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{VectorizeError, Vocabulary};
use crate::textprep::TokenDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Count,
    Tfidf,
}

/// Sparse document-term matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub doc_ids: Vec<String>,
    pub vocab: Vocabulary,
    pub weighting: Weighting,
    pub max_df: f64,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Builds the matrix, dropping terms whose document frequency is strictly
/// above `max_df` (as a fraction of documents).
pub fn build_matrix(corpus: &[TokenDoc], max_df: f64, weighting: Weighting) -> Result<DocTermMatrix, VectorizeError> {
    if corpus.is_empty() {
        return Err(VectorizeError::EmptyCorpus);
    }
    if !(max_df > 0.0 && max_df <= 1.0) {
        return Err(VectorizeError::InvalidParameter(format!("max_df must be in (0, 1], got {max_df}")));
    }
    let full = Vocabulary::build(corpus, 1);
    let total = full.total_docs() as f64;
    let vocab = full.retain(|i| full.doc_freq(i) as f64 / total <= max_df);
    if vocab.is_empty() {
        return Err(VectorizeError::EmptyVocabulary);
    }

    let mut indptr = Vec::with_capacity(corpus.len() + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for doc in corpus {
        let mut ids = vocab.encode(&doc.tokens);
        ids.sort_unstable();
        for chunk in ids.chunk_by(|a, b| a == b) {
            let col = chunk[0];
            let count = chunk.len() as f64;
            indices.push(col);
            values.push(match weighting {
                Weighting::Count => count,
                Weighting::Tfidf => count * vocab.idf(col),
            });
        }
        indptr.push(indices.len());
    }
    Ok(DocTermMatrix {
        doc_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
        vocab,
        weighting,
        max_df,
        indptr,
        indices,
        values,
    })
}

impl DocTermMatrix {
    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.vocab.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn get(&self, i: usize, col: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == col).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.n_rows(), self.n_cols()));
        for i in 0..self.n_rows() {
            for (j, v) in self.row(i) {
                dense[[i, j]] = v;
            }
        }
        dense
    }
}
