//! Document-term matrices and from-scratch word/document embeddings.

mod docvec;
mod io;
mod matrix;
pub mod sgns;
mod train;
mod vocab;

pub use docvec::{doc_vector_from_words, DocVector, WordWeighting};
pub use io::{load_model, save_model, sidecar_path, DocVectors};
pub use matrix::{build_matrix, DocTermMatrix, Weighting};
pub use train::{
    cosine, initial_vectors, train_doc2vec, train_word2vec, Doc2VecMode, EmbeddingModel, ModelKind, TrainingConfig,
};
pub use vocab::Vocabulary;

pub const DEFAULT_MAX_DF: f64 = 0.75;

#[derive(Debug, thiserror::Error)]
pub enum VectorizeError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vocabulary of {size} tokens is too small for {negatives} negative samples")]
    VocabularyTooSmall { size: usize, negatives: usize },
    #[error("model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file: {0}")]
    Format(String),
}

#[cfg(test)]
mod tests;
