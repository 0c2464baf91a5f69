//! Word2Vec (skip-gram) and Doc2Vec (PV-DBOW / PV-DM) trained with negative sampling.
//!
//! The default single worker mode is bitwise reproducible for a fixed seed.
//! With `workers > 1` the corpus is sharded across threads that update shared
//! rows without locks, trading reproducibility for throughput.

use std::ops::Range;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sgns::output_coefficient;
use super::{VectorizeError, Vocabulary};
use crate::textprep::TokenDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Word2vec,
    Doc2vec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Doc2VecMode {
    #[default]
    Dbow,
    Dm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate, decayed linearly to `min_alpha`.
    pub alpha: f32,
    pub min_alpha: f32,
    pub seed: u64,
    pub min_count: u64,
    pub workers: usize,
    pub mode: Doc2VecMode,
    /// PV-DBOW only: interleave skip-gram word training.
    pub dbow_words: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            alpha: 0.025,
            min_alpha: 0.0001,
            seed: 1,
            min_count: 1,
            workers: 1,
            mode: Doc2VecMode::Dbow,
            dbow_words: false,
        }
    }
}

impl TrainingConfig {
    pub fn doc2vec() -> Self {
        Self {
            epochs: 40,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), VectorizeError> {
        let bad = |m: String| Err(VectorizeError::InvalidParameter(m));
        if self.dim < 2 {
            return bad(format!("dim must be >= 2, got {}", self.dim));
        }
        if self.window == 0 {
            return bad("window must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.min_alpha >= 0.0 && self.min_alpha <= self.alpha) {
            return bad(format!("learning rate schedule {} -> {} is invalid", self.alpha, self.min_alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub kind: ModelKind,
    pub vocab: Vocabulary,
    /// Input word vectors, one row per vocabulary entry.
    pub word_vectors: Array2<f32>,
    pub doc_ids: Vec<String>,
    pub doc_vectors: Option<Array2<f32>>,
    pub config: TrainingConfig,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.word_vectors.ncols()
    }

    pub fn word_vector(&self, token: &str) -> Option<&[f32]> {
        let i = self.vocab.get(token)?;
        self.word_vectors.row(i).to_slice()
    }

    pub fn doc_vector(&self, index: usize) -> Option<&[f32]> {
        self.doc_vectors.as_ref()?.row(index).to_slice()
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    let dot: f32 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f32>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f32>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn train_word2vec(corpus: &[TokenDoc], config: &TrainingConfig) -> Result<EmbeddingModel, VectorizeError> {
    train(corpus, config, Objective::SkipGram)
}

pub fn train_doc2vec(corpus: &[TokenDoc], config: &TrainingConfig) -> Result<EmbeddingModel, VectorizeError> {
    let objective = match config.mode {
        Doc2VecMode::Dbow => Objective::Dbow {
            train_words: config.dbow_words,
        },
        Doc2VecMode::Dm => Objective::Dm,
    };
    train(corpus, config, objective)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    SkipGram,
    Dbow { train_words: bool },
    Dm,
}

impl Objective {
    fn has_docs(self) -> bool {
        !matches!(self, Objective::SkipGram)
    }
}

/// Row-addressable parameter storage.
trait Rows {
    fn read(&self, row: usize, out: &mut [f32]);
    fn add_scaled(&mut self, row: usize, scale: f32, x: &[f32]);
}

struct DenseRows<'a> {
    data: &'a mut [f32],
    dim: usize,
}

impl Rows for DenseRows<'_> {
    fn read(&self, row: usize, out: &mut [f32]) {
        out.copy_from_slice(&self.data[row * self.dim..(row + 1) * self.dim]);
    }

    fn add_scaled(&mut self, row: usize, scale: f32, x: &[f32]) {
        for (d, &v) in self.data[row * self.dim..(row + 1) * self.dim].iter_mut().zip(x) {
            *d += scale * v;
        }
    }
}

/// Lock-free shared rows; concurrent updates may overwrite each other.
#[derive(Clone, Copy)]
struct SharedRows<'a> {
    data: &'a [AtomicU32],
    dim: usize,
}

impl Rows for SharedRows<'_> {
    fn read(&self, row: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(&self.data[row * self.dim..(row + 1) * self.dim]) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&mut self, row: usize, scale: f32, x: &[f32]) {
        for (a, &v) in self.data[row * self.dim..(row + 1) * self.dim].iter().zip(x) {
            let cur = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + scale * v).to_bits(), Ordering::Relaxed);
        }
    }
}

struct Job<'a> {
    docs: &'a [Vec<usize>],
    objective: Objective,
    cfg: &'a TrainingConfig,
    sampler: &'a WeightedIndex<f64>,
    total_work: u64,
    progress: &'a AtomicU64,
}

struct Scratch {
    h: Vec<f32>,
    h_grad: Vec<f32>,
    out_row: Vec<f32>,
    tmp: Vec<f32>,
}

impl Job<'_> {
    fn learning_rate(&self) -> f32 {
        let done = self.progress.load(Ordering::Relaxed) as f64 / self.total_work.max(1) as f64;
        let lr = self.cfg.alpha as f64 - (self.cfg.alpha - self.cfg.min_alpha) as f64 * done;
        lr.max(self.cfg.min_alpha as f64) as f32
    }

    /// Positive plus negative output updates for input `s.h`; leaves `dL/dh` in `s.h_grad`.
    fn score_outputs<O: Rows>(&self, target: usize, out: &mut O, lr: f32, rng: &mut ChaCha8Rng, s: &mut Scratch) {
        s.h_grad.fill(0.0);
        self.apply_output(target, true, out, lr, s);
        for _ in 0..self.cfg.negatives {
            let noise = self.sampler.sample(rng);
            if noise != target {
                self.apply_output(noise, false, out, lr, s);
            }
        }
    }

    fn apply_output<O: Rows>(&self, row: usize, positive: bool, out: &mut O, lr: f32, s: &mut Scratch) {
        out.read(row, &mut s.out_row);
        let g = output_coefficient(&s.h, &s.out_row, positive);
        for (hg, &o) in s.h_grad.iter_mut().zip(&s.out_row) {
            *hg += g * o;
        }
        out.add_scaled(row, -lr * g, &s.h);
    }

    fn skip_gram_position<W: Rows, O: Rows>(
        &self,
        ids: &[usize],
        pos: usize,
        words_in: &mut W,
        out: &mut O,
        lr: f32,
        rng: &mut ChaCha8Rng,
        s: &mut Scratch,
    ) {
        let reach = rng.random_range(1..=self.cfg.window);
        let lo = pos.saturating_sub(reach);
        let hi = (pos + reach).min(ids.len() - 1);
        for ctx in lo..=hi {
            if ctx == pos {
                continue;
            }
            words_in.read(ids[ctx], &mut s.h);
            self.score_outputs(ids[pos], out, lr, rng, s);
            words_in.add_scaled(ids[ctx], -lr, &s.h_grad);
        }
    }

    fn run<D: Rows, W: Rows, O: Rows>(
        &self,
        range: Range<usize>,
        docs_in: &mut D,
        words_in: &mut W,
        out: &mut O,
        rng: &mut ChaCha8Rng,
    ) {
        let dim = self.cfg.dim;
        let mut s = Scratch {
            h: vec![0.0; dim],
            h_grad: vec![0.0; dim],
            out_row: vec![0.0; dim],
            tmp: vec![0.0; dim],
        };
        for _ in 0..self.cfg.epochs {
            for d in range.clone() {
                let ids = &self.docs[d];
                for pos in 0..ids.len() {
                    let lr = self.learning_rate();
                    match self.objective {
                        Objective::SkipGram => self.skip_gram_position(ids, pos, words_in, out, lr, rng, &mut s),
                        Objective::Dbow { train_words } => {
                            docs_in.read(d, &mut s.h);
                            self.score_outputs(ids[pos], out, lr, rng, &mut s);
                            docs_in.add_scaled(d, -lr, &s.h_grad);
                            if train_words {
                                self.skip_gram_position(ids, pos, words_in, out, lr, rng, &mut s);
                            }
                        }
                        Objective::Dm => {
                            let reach = rng.random_range(1..=self.cfg.window);
                            let lo = pos.saturating_sub(reach);
                            let hi = (pos + reach).min(ids.len() - 1);
                            docs_in.read(d, &mut s.h);
                            let mut members = 1.0f32;
                            for ctx in (lo..=hi).filter(|&c| c != pos) {
                                words_in.read(ids[ctx], &mut s.tmp);
                                for (h, &t) in s.h.iter_mut().zip(&s.tmp) {
                                    *h += t;
                                }
                                members += 1.0;
                            }
                            for h in s.h.iter_mut() {
                                *h /= members;
                            }
                            self.score_outputs(ids[pos], out, lr, rng, &mut s);
                            docs_in.add_scaled(d, -lr, &s.h_grad);
                            for ctx in (lo..=hi).filter(|&c| c != pos) {
                                words_in.add_scaled(ids[ctx], -lr, &s.h_grad);
                            }
                        }
                    }
                    self.progress.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }
}

fn uniform_init(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let scale = 1.0 / dim as f32;
    (0..rows * dim).map(|_| (rng.random::<f32>() - 0.5) * scale).collect()
}

fn train(corpus: &[TokenDoc], config: &TrainingConfig, objective: Objective) -> Result<EmbeddingModel, VectorizeError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(VectorizeError::EmptyCorpus);
    }
    let vocab = Vocabulary::build(corpus, config.min_count);
    if vocab.len() < (config.negatives + 1).max(2) {
        return Err(VectorizeError::VocabularyTooSmall {
            size: vocab.len(),
            negatives: config.negatives,
        });
    }
    let dim = config.dim;
    let docs: Vec<Vec<usize>> = corpus.iter().map(|d| vocab.encode(&d.tokens)).collect();
    let n_docs = if objective.has_docs() { docs.len() } else { 0 };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut words_in = uniform_init(vocab.len(), dim, &mut rng);
    let mut docs_in = uniform_init(n_docs, dim, &mut rng);
    let mut out = vec![0.0f32; vocab.len() * dim];

    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).collect();
    let sampler = WeightedIndex::new(&weights).map_err(|e| VectorizeError::InvalidParameter(e.to_string()))?;
    let words_per_epoch: u64 = docs.iter().map(|d| d.len() as u64).sum();
    let progress = AtomicU64::new(0);
    let job = Job {
        docs: &docs,
        objective,
        cfg: config,
        sampler: &sampler,
        total_work: words_per_epoch * config.epochs as u64,
        progress: &progress,
    };

    if config.workers == 1 {
        job.run(
            0..docs.len(),
            &mut DenseRows { data: &mut docs_in, dim },
            &mut DenseRows { data: &mut words_in, dim },
            &mut DenseRows { data: &mut out, dim },
            &mut rng,
        );
    } else {
        let to_atomic = |v: &[f32]| v.iter().map(|x| AtomicU32::new(x.to_bits())).collect::<Vec<_>>();
        let (shared_docs, shared_words, shared_out) = (to_atomic(&docs_in), to_atomic(&words_in), to_atomic(&out));
        let shard = docs.len().div_ceil(config.workers);
        std::thread::scope(|scope| {
            for w in 0..config.workers {
                let range = (w * shard).min(docs.len())..((w + 1) * shard).min(docs.len());
                let job = &job;
                let mut d = SharedRows { data: &shared_docs, dim };
                let mut wi = SharedRows { data: &shared_words, dim };
                let mut o = SharedRows { data: &shared_out, dim };
                let mut rng = rng.clone();
                rng.set_stream(w as u64 + 1);
                scope.spawn(move || job.run(range, &mut d, &mut wi, &mut o, &mut rng));
            }
        });
        let from_atomic = |v: Vec<AtomicU32>| v.into_iter().map(|a| f32::from_bits(a.into_inner())).collect::<Vec<_>>();
        docs_in = from_atomic(shared_docs);
        words_in = from_atomic(shared_words);
    }

    let word_vectors = Array2::from_shape_vec((vocab.len(), dim), words_in).expect("shape");
    let doc_vectors = objective
        .has_docs()
        .then(|| Array2::from_shape_vec((n_docs, dim), docs_in).expect("shape"));
    Ok(EmbeddingModel {
        kind: if objective.has_docs() { ModelKind::Doc2vec } else { ModelKind::Word2vec },
        vocab,
        word_vectors,
        doc_ids: if objective.has_docs() {
            corpus.iter().map(|d| d.doc_id.clone()).collect()
        } else {
            Vec::new()
        },
        doc_vectors,
        config: config.clone(),
    })
}

/// Initial input vectors for a config, as training would draw them.
pub fn initial_vectors(corpus: &[TokenDoc], config: &TrainingConfig, with_docs: bool) -> (Array2<f32>, Array2<f32>) {
    let vocab = Vocabulary::build(corpus, config.min_count);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let words = uniform_init(vocab.len(), config.dim, &mut rng);
    let n_docs = if with_docs { corpus.len() } else { 0 };
    let docs = uniform_init(n_docs, config.dim, &mut rng);
    (
        Array2::from_shape_vec((vocab.len(), config.dim), words).expect("shape"),
        Array2::from_shape_vec((n_docs, config.dim), docs).expect("shape"),
    )
}
