//! Model files: a binary header and little-endian f32 rows, plus a JSON sidecar.
//!
//! Header layout (all little-endian u32 after the magic):
//! `magic[8] kind dim n_words n_docs`, then `n_words` word rows followed by
//! `n_docs` document rows.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EmbeddingModel, ModelKind, TrainingConfig, VectorizeError, Vocabulary};

const MODEL_MAGIC: &[u8; 8] = b"CMEMBED1";
const VECTORS_MAGIC: &[u8; 8] = b"CMDOCVE1";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    kind: ModelKind,
    vocab: Vocabulary,
    doc_ids: Vec<String>,
    config: TrainingConfig,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    path.with_file_name(name)
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<(), VectorizeError> {
    let v = u32::try_from(v).map_err(|_| VectorizeError::Format(format!("{v} does not fit a u32 header field")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_rows(out: &mut Vec<u8>, m: &Array2<f32>) {
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], VectorizeError> {
        let end = self.at + n;
        if end > self.bytes.len() {
            return Err(VectorizeError::Format(format!(
                "truncated file: need {end} bytes, have {}",
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, VectorizeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn rows(&mut self, n: usize, dim: usize) -> Result<Array2<f32>, VectorizeError> {
        let raw = self.take(n * dim * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Ok(Array2::from_shape_vec((n, dim), data).expect("shape"))
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>, VectorizeError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<(), VectorizeError> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    put_u32(&mut out, matches!(model.kind, ModelKind::Doc2vec) as usize)?;
    put_u32(&mut out, model.dim())?;
    put_u32(&mut out, model.vocab.len())?;
    let n_docs = model.doc_vectors.as_ref().map_or(0, |d| d.nrows());
    put_u32(&mut out, n_docs)?;
    put_rows(&mut out, &model.word_vectors);
    if let Some(d) = &model.doc_vectors {
        put_rows(&mut out, d);
    }
    fs::File::create(path)?.write_all(&out)?;
    let sidecar = Sidecar {
        kind: model.kind,
        vocab: model.vocab.clone(),
        doc_ids: model.doc_ids.clone(),
        config: model.config.clone(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel, VectorizeError> {
    let bytes = read_all(path)?;
    let mut cur = Cursor { bytes: &bytes, at: 0 };
    if cur.take(8)? != MODEL_MAGIC {
        return Err(VectorizeError::Format(format!("{} is not an embedding model file", path.display())));
    }
    let kind = match cur.u32()? {
        0 => ModelKind::Word2vec,
        1 => ModelKind::Doc2vec,
        k => return Err(VectorizeError::Format(format!("unknown model kind {k}"))),
    };
    let dim = cur.u32()?;
    let n_words = cur.u32()?;
    let n_docs = cur.u32()?;
    let word_vectors = cur.rows(n_words, dim)?;
    let doc_vectors = match kind {
        ModelKind::Doc2vec => Some(cur.rows(n_docs, dim)?),
        ModelKind::Word2vec => None,
    };
    let sidecar: Sidecar = serde_json::from_slice(&read_all(&sidecar_path(path))?)?;
    if sidecar.kind != kind || sidecar.vocab.len() != n_words {
        return Err(VectorizeError::Format("model sidecar does not match binary header".into()));
    }
    Ok(EmbeddingModel {
        kind,
        vocab: sidecar.vocab,
        word_vectors,
        doc_ids: sidecar.doc_ids,
        doc_vectors,
        config: sidecar.config,
    })
}

/// Document vectors keyed by id, the input of the clustering stage.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVectors {
    pub doc_ids: Vec<String>,
    pub vectors: Array2<f32>,
}

impl DocVectors {
    pub fn save(&self, path: &Path) -> Result<(), VectorizeError> {
        let mut out = Vec::new();
        out.extend_from_slice(VECTORS_MAGIC);
        put_u32(&mut out, self.vectors.ncols())?;
        put_u32(&mut out, self.vectors.nrows())?;
        put_rows(&mut out, &self.vectors);
        fs::File::create(path)?.write_all(&out)?;
        fs::write(sidecar_path(path), serde_json::to_vec_pretty(&self.doc_ids)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VectorizeError> {
        let bytes = read_all(path)?;
        let mut cur = Cursor { bytes: &bytes, at: 0 };
        if cur.take(8)? != VECTORS_MAGIC {
            return Err(VectorizeError::Format(format!("{} is not a document vector file", path.display())));
        }
        let dim = cur.u32()?;
        let n = cur.u32()?;
        let vectors = cur.rows(n, dim)?;
        let doc_ids: Vec<String> = serde_json::from_slice(&read_all(&sidecar_path(path))?)?;
        if doc_ids.len() != n {
            return Err(VectorizeError::Format(format!("{} ids for {n} vectors", doc_ids.len())));
        }
        Ok(Self { doc_ids, vectors })
    }
}
