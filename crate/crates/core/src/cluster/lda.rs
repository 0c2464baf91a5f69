//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{write_json, ClusterAssignment, ClusterError};
use crate::vectorize::{DocTermMatrix, Weighting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub k: usize,
    /// Document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            k: 10,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub doc_ids: Vec<String>,
    pub vocab: Vec<String>,
    #[serde(skip)]
    pub topic_word_counts: Array2<u32>,
    #[serde(skip)]
    pub doc_topic_counts: Array2<u32>,
    /// Topic of every token, documents in order, tokens sorted by vocabulary index.
    #[serde(skip)]
    pub assignments: Vec<Vec<u32>>,
}

/// Expands each matrix row into vocabulary indices, one per token occurrence.
fn expand_tokens(matrix: &DocTermMatrix) -> Result<Vec<Vec<usize>>, ClusterError> {
    if matrix.weighting != Weighting::Count {
        return Err(ClusterError::NotCountMatrix);
    }
    Ok((0..matrix.n_rows())
        .map(|i| {
            matrix
                .row(i)
                .flat_map(|(w, c)| std::iter::repeat_n(w, c as usize))
                .collect()
        })
        .collect())
}

fn check(cfg: &LdaConfig) -> Result<(), ClusterError> {
    if cfg.k == 0 {
        return Err(ClusterError::InvalidK { k: 0, rows: 0 });
    }
    if !(cfg.alpha() > 0.0 && cfg.beta > 0.0) {
        return Err(ClusterError::InvalidParameter("alpha and beta must be positive".into()));
    }
    Ok(())
}

fn random_topics(docs: &[Vec<usize>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    docs.iter()
        .map(|d| d.iter().map(|_| rng.random_range(0..k as u32)).collect())
        .collect()
}

/// The topic assignments a fit with this config starts from.
pub fn lda_initial_assignments(matrix: &DocTermMatrix, cfg: &LdaConfig) -> Result<Vec<Vec<u32>>, ClusterError> {
    check(cfg)?;
    let docs = expand_tokens(matrix)?;
    Ok(random_topics(&docs, cfg.k, &mut ChaCha8Rng::seed_from_u64(cfg.seed)))
}

pub fn lda_fit(matrix: &DocTermMatrix, cfg: &LdaConfig) -> Result<LdaModel, ClusterError> {
    check(cfg)?;
    let docs = expand_tokens(matrix)?;
    let (k, v) = (cfg.k, matrix.n_cols());
    let (alpha, beta) = (cfg.alpha(), cfg.beta);
    let v_beta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut z = random_topics(&docs, k, &mut rng);

    let mut tw = Array2::<u32>::zeros((k, v));
    let mut dt = Array2::<u32>::zeros((docs.len(), k));
    let mut totals = vec![0u64; k];
    for (d, (words, topics)) in docs.iter().zip(&z).enumerate() {
        for (&w, &t) in words.iter().zip(topics) {
            tw[[t as usize, w]] += 1;
            dt[[d, t as usize]] += 1;
            totals[t as usize] += 1;
        }
    }
    let n_tokens: u64 = docs.iter().map(|d| d.len() as u64).sum();

    let mut cumulative = vec![0.0f64; k];
    for sweep in 0..cfg.iterations {
        for (d, words) in docs.iter().enumerate() {
            for (pos, &w) in words.iter().enumerate() {
                let old = z[d][pos] as usize;
                tw[[old, w]] -= 1;
                dt[[d, old]] -= 1;
                totals[old] -= 1;

                let mut acc = 0.0;
                for (t, c) in cumulative.iter_mut().enumerate() {
                    acc += (dt[[d, t]] as f64 + alpha) * (tw[[t, w]] as f64 + beta) / (totals[t] as f64 + v_beta);
                    *c = acc;
                }
                let u = rng.random::<f64>() * acc;
                let new = cumulative.partition_point(|&c| c <= u).min(k - 1);

                z[d][pos] = new as u32;
                tw[[new, w]] += 1;
                dt[[d, new]] += 1;
                totals[new] += 1;
            }
        }
        let counted: u64 = tw.iter().map(|&c| c as u64).sum();
        assert_eq!(counted, n_tokens, "topic-word counts drifted after sweep {sweep}");
    }

    Ok(LdaModel {
        k,
        alpha,
        beta,
        iterations: cfg.iterations,
        seed: cfg.seed,
        doc_ids: matrix.doc_ids.clone(),
        vocab: matrix.vocab.tokens().to_vec(),
        topic_word_counts: tw,
        doc_topic_counts: dt,
        assignments: z,
    })
}

/// Most probable topic per document; ties go to the lowest topic index.
pub fn lda_doc_labels(model: &LdaModel) -> ClusterAssignment {
    let labels = model
        .doc_topic_counts
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (t, &c) in row.iter().enumerate() {
                if c > row[best] {
                    best = t;
                }
            }
            best
        })
        .collect();
    ClusterAssignment::new(model.doc_ids.clone(), labels, model.k, "lda", None).expect("labels below k")
}

const COUNTS_MAGIC: &[u8; 8] = b"CMLDACT1";

impl LdaModel {
    pub fn topic_totals(&self) -> Vec<u64> {
        self.topic_word_counts
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&c| c as u64).sum())
            .collect()
    }

    /// Smoothed `p(word | topic)`.
    pub fn topic_word_distribution(&self) -> Array2<f64> {
        let v = self.vocab.len() as f64;
        let totals = self.topic_totals();
        Array2::from_shape_fn(self.topic_word_counts.dim(), |(t, w)| {
            (self.topic_word_counts[[t, w]] as f64 + self.beta) / (totals[t] as f64 + v * self.beta)
        })
    }

    /// Smoothed `p(topic | doc)`.
    pub fn doc_topic_distribution(&self) -> Array2<f64> {
        let ka = self.k as f64 * self.alpha;
        Array2::from_shape_fn(self.doc_topic_counts.dim(), |(d, t)| {
            let len: u32 = self.doc_topic_counts.row(d).sum();
            (self.doc_topic_counts[[d, t]] as f64 + self.alpha) / (len as f64 + ka)
        })
    }

    /// The `n` highest-count words of a topic, ties alphabetical.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(String, u32)> {
        let mut words: Vec<(String, u32)> = self
            .topic_word_counts
            .row(topic)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (self.vocab[w].clone(), c))
            .collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        words.truncate(n);
        words
    }

    /// Writes `<stem>.json` with parameters and `<stem>.counts` with the count tables.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), ClusterError> {
        write_json(&dir.join(format!("{stem}.json")), self)?;
        let mut out = Vec::new();
        out.extend_from_slice(COUNTS_MAGIC);
        let (d, k, v) = (self.doc_topic_counts.nrows(), self.k, self.vocab.len());
        for x in [k, v, d] {
            out.extend_from_slice(&(x as u32).to_le_bytes());
        }
        for x in self.topic_word_counts.iter().chain(self.doc_topic_counts.iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for x in self.assignments.iter().flatten() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        fs::write(dir.join(format!("{stem}.counts")), out)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self, ClusterError> {
        let mut model: LdaModel = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
        let bytes = fs::read(dir.join(format!("{stem}.counts")))?;
        if bytes.len() < 20 || &bytes[..8] != COUNTS_MAGIC || (bytes.len() - 20) % 4 != 0 {
            return Err(ClusterError::Format("not an LDA count file".into()));
        }
        let words: Vec<u32> = bytes[8..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let (k, v, d) = (words[0] as usize, words[1] as usize, words[2] as usize);
        if k != model.k || v != model.vocab.len() || d != model.doc_ids.len() || words.len() < 3 + k * v + d * k {
            return Err(ClusterError::Format("LDA count file does not match its metadata".into()));
        }
        let body = &words[3..];
        model.topic_word_counts = Array2::from_shape_vec((k, v), body[..k * v].to_vec()).expect("shape");
        model.doc_topic_counts = Array2::from_shape_vec((d, k), body[k * v..k * v + d * k].to_vec()).expect("shape");
        let mut rest = &body[k * v + d * k..];
        model.assignments = Vec::with_capacity(d);
        for row in model.doc_topic_counts.rows() {
            let len = row.sum() as usize;
            if rest.len() < len {
                return Err(ClusterError::Format("truncated topic assignments".into()));
            }
            model.assignments.push(rest[..len].to_vec());
            rest = &rest[len..];
        }
        Ok(model)
    }
}
