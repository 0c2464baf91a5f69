//! K-means, collapsed-Gibbs LDA and chunk-topic-sequence clustering.

mod chunkseq;
mod kmeans;
mod lda;

pub use chunkseq::{chunk_topic_sequence_cluster, split_chunks, ChunkSeqConfig, ChunkSeqResult, DEFAULT_CHUNK_SIZE};
pub use kmeans::{kmeans, normalize_rows, KmeansConfig, KmeansResult};
pub use lda::{lda_doc_labels, lda_fit, lda_initial_assignments, LdaConfig, LdaModel};

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::vectorize::VectorizeError;

#[derive(Debug, thiserror::Error)]
pub enum ClusterError {
    #[error("k must be in 1..={rows}, got {k}")]
    InvalidK { k: usize, rows: usize },
    #[error("LDA needs a count-weighted matrix")]
    NotCountMatrix,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{ids} document ids but {labels} labels")]
    LengthMismatch { ids: usize, labels: usize },
    #[error("label {label} is out of range for k={k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error("cluster io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cluster json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("assignment csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("cluster file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub doc_ids: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub model_tag: String,
    #[serde(skip)]
    pub centroids: Option<Array2<f64>>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentRow {
    doc_id: String,
    label: usize,
}

impl ClusterAssignment {
    pub fn new(
        doc_ids: Vec<String>,
        labels: Vec<usize>,
        k: usize,
        model_tag: impl Into<String>,
        centroids: Option<Array2<f64>>,
    ) -> Result<Self, ClusterError> {
        if doc_ids.len() != labels.len() {
            return Err(ClusterError::LengthMismatch {
                ids: doc_ids.len(),
                labels: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(ClusterError::LabelOutOfRange { label, k });
        }
        if let Some(c) = &centroids {
            if c.nrows() != k {
                return Err(ClusterError::Format(format!("{} centroid rows for k={k}", c.nrows())));
            }
        }
        Ok(Self {
            doc_ids,
            labels,
            k,
            model_tag: model_tag.into(),
            centroids,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn label_of(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id).map(|i| self.labels[i])
    }

    /// Writes `doc_id,label` rows.
    pub fn write_csv(&self, path: &Path) -> Result<(), ClusterError> {
        let mut w = csv::Writer::from_path(path)?;
        for (doc_id, &label) in self.doc_ids.iter().zip(&self.labels) {
            w.serialize(AssignmentRow {
                doc_id: doc_id.clone(),
                label,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `doc_id,label` file; `k` is taken as one more than the largest label.
    pub fn read_csv(path: &Path, model_tag: &str) -> Result<Self, ClusterError> {
        let mut r = csv::Reader::from_path(path)?;
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for row in r.deserialize() {
            let row: AssignmentRow = row?;
            ids.push(row.doc_id);
            labels.push(row.label);
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(ids, labels, k, model_tag, None)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ClusterError> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}
