use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EmbeddingModel;
use crate::textprep::TokenDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordWeighting {
    Uniform,
    #[default]
    Tfidf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub vector: Vec<f32>,
    /// Set when no token of the document is in the model vocabulary.
    pub all_oov: bool,
}

/// Weighted mean of the in-vocabulary word vectors of `doc`.
///
/// Uniform weighting counts every occurrence once. TF-IDF weights each
/// distinct word by `count * ln(total_docs / doc_freq)` using the model's
/// training statistics; if every weight is zero the uniform mean is used.
pub fn doc_vector_from_words(model: &EmbeddingModel, doc: &TokenDoc, weighting: WordWeighting) -> DocVector {
    let dim = model.dim();
    let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
    for id in model.vocab.encode(&doc.tokens) {
        *tf.entry(id).or_insert(0.0) += 1.0;
    }
    if tf.is_empty() {
        return DocVector {
            vector: vec![0.0; dim],
            all_oov: true,
        };
    }
    let weighted: Vec<(usize, f64)> = match weighting {
        WordWeighting::Uniform => tf.iter().map(|(&i, &c)| (i, c)).collect(),
        WordWeighting::Tfidf => {
            let w: Vec<(usize, f64)> = tf.iter().map(|(&i, &c)| (i, c * model.vocab.idf(i))).collect();
            if w.iter().map(|(_, x)| x).sum::<f64>() > 0.0 {
                w
            } else {
                tf.iter().map(|(&i, &c)| (i, c)).collect()
            }
        }
    };
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    let mut acc = vec![0.0f64; dim];
    for (i, w) in weighted {
        for (a, &v) in acc.iter_mut().zip(model.word_vectors.row(i)) {
            *a += w * v as f64;
        }
    }
    DocVector {
        vector: acc.into_iter().map(|a| (a / total) as f32).collect(),
        all_oov: false,
    }
}
