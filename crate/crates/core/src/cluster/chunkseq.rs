//! Clustering documents by the sequence of topics of their chunks.
//!
//! Each document is cut into fixed-size chunks, every chunk gets a topic
//! label from a chunk-level LDA model, and the label sequence of a document
//! is treated as a sentence. Word2Vec over those sentences embeds the labels;
//! a document is the mean of its label vectors, and K-means groups them.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{kmeans, lda_doc_labels, lda_fit, ClusterAssignment, ClusterError, KmeansConfig, LdaConfig};
use crate::textprep::{Stage, TokenDoc};
use crate::vectorize::{build_matrix, train_word2vec, TrainingConfig, Weighting};

pub const DEFAULT_CHUNK_SIZE: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkSeqConfig {
    pub chunk_size: usize,
    pub chunk_model_k: usize,
    pub final_k: usize,
    pub seed: u64,
    pub lda_iterations: usize,
    pub embedding: TrainingConfig,
    pub kmeans_n_init: usize,
}

impl Default for ChunkSeqConfig {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            chunk_model_k: 20,
            final_k: 9,
            seed: 0,
            lda_iterations: 300,
            embedding: TrainingConfig {
                dim: 32,
                window: 3,
                epochs: 20,
                ..TrainingConfig::default()
            },
            kmeans_n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSeqResult {
    pub assignment: ClusterAssignment,
    /// Chunk topic labels per document, in reading order.
    pub sequences: Vec<Vec<usize>>,
    pub doc_vectors: Array2<f64>,
}

/// Consecutive chunks of `size` tokens; the last may be shorter. An empty
/// document yields a single empty chunk.
pub fn split_chunks(tokens: &[String], size: usize) -> Vec<&[String]> {
    assert!(size >= 1, "chunk size must be positive");
    if tokens.is_empty() {
        return vec![tokens];
    }
    tokens.chunks(size).collect()
}

fn label_token(label: usize) -> String {
    format!("topic{label}")
}

pub fn chunk_topic_sequence_cluster(corpus: &[TokenDoc], cfg: &ChunkSeqConfig) -> Result<ChunkSeqResult, ClusterError> {
    if corpus.is_empty() {
        return Err(ClusterError::EmptyCorpus);
    }
    if cfg.chunk_size == 0 {
        return Err(ClusterError::InvalidParameter("chunk_size must be >= 1".into()));
    }

    let mut chunk_docs = Vec::new();
    let mut owner = Vec::new();
    for (d, doc) in corpus.iter().enumerate() {
        for (c, chunk) in split_chunks(&doc.tokens, cfg.chunk_size).into_iter().enumerate() {
            chunk_docs.push(TokenDoc::new(format!("{}#{c}", doc.doc_id), Stage::Cleaned, chunk.to_vec()));
            owner.push(d);
        }
    }
    let matrix = build_matrix(&chunk_docs, 1.0, Weighting::Count)?;
    let lda = lda_fit(
        &matrix,
        &LdaConfig {
            k: cfg.chunk_model_k,
            iterations: cfg.lda_iterations,
            seed: cfg.seed,
            ..LdaConfig::default()
        },
    )?;
    let chunk_labels = lda_doc_labels(&lda).labels;

    let mut sequences = vec![Vec::new(); corpus.len()];
    for (&d, &label) in owner.iter().zip(&chunk_labels) {
        sequences[d].push(label);
    }
    let sentences: Vec<TokenDoc> = corpus
        .iter()
        .zip(&sequences)
        .map(|(doc, seq)| TokenDoc::new(doc.doc_id.clone(), Stage::Cleaned, seq.iter().map(|&l| label_token(l)).collect()))
        .collect();

    let distinct = {
        let mut s: Vec<usize> = chunk_labels.clone();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    let dim = cfg.embedding.dim;
    let doc_vectors = if distinct < 2 {
        // a single label carries no information; all documents coincide
        Array2::zeros((corpus.len(), dim))
    } else {
        let emb_cfg = TrainingConfig {
            negatives: cfg.embedding.negatives.min(distinct - 1),
            seed: cfg.seed,
            min_count: 1,
            ..cfg.embedding.clone()
        };
        let model = train_word2vec(&sentences, &emb_cfg)?;
        let mut out = Array2::zeros((corpus.len(), dim));
        for (d, sentence) in sentences.iter().enumerate() {
            let mut row = out.row_mut(d);
            for t in &sentence.tokens {
                let v = model.word_vector(t).expect("every label is in the vocabulary");
                for (o, &x) in row.iter_mut().zip(v) {
                    *o += x as f64;
                }
            }
            row /= sentence.tokens.len() as f64;
        }
        out
    };

    let km = kmeans(
        &doc_vectors,
        &KmeansConfig {
            k: cfg.final_k,
            seed: cfg.seed,
            n_init: cfg.kmeans_n_init,
            normalize: true,
            ..KmeansConfig::default()
        },
    )?;
    let ids = corpus.iter().map(|d| d.doc_id.clone()).collect();
    Ok(ChunkSeqResult {
        assignment: km.into_assignment(ids, "chunkseq")?,
        sequences,
        doc_vectors,
    })
}
