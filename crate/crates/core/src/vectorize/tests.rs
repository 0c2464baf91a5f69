use approx::assert_relative_eq;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sgns::{sgns_gradients, sgns_loss};
use super::*;
use crate::textprep::{Stage, TokenDoc};

fn doc(id: &str, words: &[&str]) -> TokenDoc {
    TokenDoc::new(id, Stage::Cleaned, words.iter().map(|s| s.to_string()).collect())
}

fn small_config() -> TrainingConfig {
    TrainingConfig {
        dim: 16,
        window: 3,
        negatives: 3,
        epochs: 5,
        seed: 7,
        ..TrainingConfig::default()
    }
}

#[test]
fn max_df_is_strict() {
    let corpus = vec![
        doc("a", &["all", "most", "rare", "rare"]),
        doc("b", &["all", "most"]),
        doc("c", &["all", "most"]),
        doc("d", &["all", "other"]),
    ];
    let m = build_matrix(&corpus, 0.75, Weighting::Count).unwrap();
    assert!(m.vocab.get("all").is_none());
    assert!(m.vocab.get("most").is_some());
    let t = build_matrix(&corpus, 0.75, Weighting::Tfidf).unwrap();
    let rare = t.vocab.get("rare").unwrap();
    assert_relative_eq!(t.get(0, rare), 2.0 * 4f64.ln(), epsilon = 1e-12);
    assert_relative_eq!(t.get(0, rare), 2.7726, epsilon = 1e-4);
    assert!(t.to_dense().iter().all(|&v| v >= 0.0));
}

#[test]
fn max_df_errors() {
    let corpus = vec![doc("a", &["x"]), doc("b", &["x"])];
    assert!(matches!(build_matrix(&corpus, 0.75, Weighting::Count), Err(VectorizeError::EmptyVocabulary)));
    assert!(matches!(build_matrix(&[], 0.75, Weighting::Count), Err(VectorizeError::EmptyCorpus)));
    assert!(matches!(build_matrix(&corpus, 0.0, Weighting::Count), Err(VectorizeError::InvalidParameter(_))));
}

#[test]
fn count_row_sums_match_retained_tokens() {
    let corpus = vec![
        doc("a", &["common", "x", "y", "x"]),
        doc("b", &["common", "y"]),
        doc("c", &["common", "z", "z", "z"]),
    ];
    let m = build_matrix(&corpus, 0.75, Weighting::Count).unwrap();
    for (i, d) in corpus.iter().enumerate() {
        let retained = d.tokens.iter().filter(|t| m.vocab.get(t).is_some()).count();
        assert_eq!(m.row_sum(i), retained as f64);
    }
    assert_eq!(m.nnz(), 4);
}

fn numeric_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        diff / norm
    }
}

#[test]
fn sgns_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 8;
    let vec = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    for _ in 0..20 {
        let h = vec(&mut rng);
        let p = vec(&mut rng);
        let n: Vec<Vec<f64>> = (0..3).map(|_| vec(&mut rng)).collect();
        let nr: Vec<&[f64]> = n.iter().map(|v| v.as_slice()).collect();
        let g = sgns_gradients(&h, &p, &nr);
        let gh = numeric_grad(|x| sgns_loss(x, &p, &nr), &h);
        assert!(rel_err(&g.input, &gh) < 1e-4);
        let gp = numeric_grad(|x| sgns_loss(&h, x, &nr), &p);
        assert!(rel_err(&g.positive, &gp) < 1e-4);
        for k in 0..n.len() {
            let gn = numeric_grad(
                |x| {
                    let mut negs = nr.clone();
                    negs[k] = x;
                    sgns_loss(&h, &p, &negs)
                },
                &n[k],
            );
            assert!(rel_err(&g.negatives[k], &gn) < 1e-4);
        }
    }
}

fn capitals_corpus() -> Vec<TokenDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fr = ["paris", "france", "seine", "louvre", "wine"];
    let uk = ["london", "england", "thames", "tower", "tea"];
    let filler = ["alpha", "beta", "gamma", "delta", "omega", "sigma"];
    (0..300)
        .map(|i| {
            let theme = if i % 2 == 0 { &fr } else { &uk };
            let mut words: Vec<&str> = (0..8).map(|_| theme[rng.random_range(0..theme.len())]).collect();
            words.push(filler[rng.random_range(0..filler.len())]);
            words.shuffle(&mut rng);
            doc(&format!("d{i}"), &words)
        })
        .collect()
}

#[test]
fn word2vec_learns_cooccurrence() {
    let corpus = capitals_corpus();
    let model = train_word2vec(&corpus, &small_config()).unwrap();
    assert_eq!(model.kind, ModelKind::Word2vec);
    assert!(model.doc_vectors.is_none());
    assert!(model.word_vectors.iter().all(|v| v.is_finite()));
    let v = |t| model.word_vector(t).unwrap();
    assert!(cosine(v("paris"), v("france")) > cosine(v("paris"), v("london")));
    assert!(cosine(v("london"), v("england")) > cosine(v("london"), v("wine")));
}

#[test]
fn seeded_training_is_bitwise_reproducible() {
    let corpus = capitals_corpus();
    let a = train_word2vec(&corpus, &small_config()).unwrap();
    let b = train_word2vec(&corpus, &small_config()).unwrap();
    assert_eq!(a, b);
    let c = train_word2vec(&corpus, &TrainingConfig { seed: 8, ..small_config() }).unwrap();
    assert_ne!(a.word_vectors, c.word_vectors);
}

#[test]
fn multi_worker_training_runs() {
    let corpus = capitals_corpus();
    let cfg = TrainingConfig { workers: 3, ..small_config() };
    let model = train_doc2vec(&corpus, &cfg).unwrap();
    assert!(model.doc_vectors.unwrap().iter().all(|v| v.is_finite()));
}

#[test]
fn tiny_vocabulary_is_rejected() {
    let corpus = vec![doc("a", &["only", "only"])];
    let cfg = TrainingConfig { negatives: 0, ..small_config() };
    assert!(matches!(
        train_word2vec(&corpus, &cfg),
        Err(VectorizeError::VocabularyTooSmall { size: 1, .. })
    ));
    let corpus = vec![doc("a", &["a", "b", "c"])];
    assert!(matches!(
        train_doc2vec(&corpus, &small_config()),
        Err(VectorizeError::VocabularyTooSmall { size: 3, negatives: 3 })
    ));
    assert!(matches!(train_word2vec(&[], &small_config()), Err(VectorizeError::EmptyCorpus)));
    let cfg = TrainingConfig { dim: 1, ..small_config() };
    assert!(matches!(train_word2vec(&corpus, &cfg), Err(VectorizeError::InvalidParameter(_))));
}

#[test]
fn zero_epochs_keep_initialization() {
    let corpus = capitals_corpus();
    let cfg = TrainingConfig { epochs: 0, ..small_config() };
    let (words, docs) = initial_vectors(&corpus, &cfg, true);
    let bound = 0.5 / cfg.dim as f32;
    assert!(words.iter().all(|v| v.abs() <= bound));
    let d2v = train_doc2vec(&corpus, &cfg).unwrap();
    assert_eq!(d2v.word_vectors, words);
    assert_eq!(d2v.doc_vectors.unwrap(), docs);
    let w2v = train_word2vec(&corpus, &cfg).unwrap();
    assert_eq!(w2v.word_vectors, initial_vectors(&corpus, &cfg, false).0);
}

fn mean_cos(vs: &ndarray::Array2<f32>, a: &[usize], b: &[usize]) -> f32 {
    let mut total = 0.0;
    let mut n = 0;
    for &i in a {
        for &j in b {
            if i != j {
                total += cosine(vs.row(i).to_slice().unwrap(), vs.row(j).to_slice().unwrap());
                n += 1;
            }
        }
    }
    total / n as f32
}

#[test]
fn doc2vec_separates_disjoint_groups() {
    let corpus = capitals_corpus();
    for mode in [Doc2VecMode::Dbow, Doc2VecMode::Dm] {
        let cfg = TrainingConfig {
            epochs: 20,
            mode,
            ..small_config()
        };
        let model = train_doc2vec(&corpus, &cfg).unwrap();
        let dv = model.doc_vectors.as_ref().unwrap();
        let even: Vec<usize> = (0..corpus.len()).step_by(2).collect();
        let odd: Vec<usize> = (1..corpus.len()).step_by(2).collect();
        let intra = (mean_cos(dv, &even, &even) + mean_cos(dv, &odd, &odd)) / 2.0;
        let inter = mean_cos(dv, &even, &odd);
        assert!(intra > inter, "{mode:?}: intra {intra} inter {inter}");
    }
}

#[test]
fn doc2vec_duplicates_converge() {
    let mut corpus = capitals_corpus();
    let dup = TokenDoc {
        doc_id: "dup".into(),
        ..corpus[0].clone()
    };
    corpus.push(dup);
    let cfg = TrainingConfig {
        epochs: 60,
        ..small_config()
    };
    let model = train_doc2vec(&corpus, &cfg).unwrap();
    let first = model.doc_vector(0).unwrap();
    let last = model.doc_vector(corpus.len() - 1).unwrap();
    assert!(cosine(first, last) > 0.9, "{}", cosine(first, last));
    assert_eq!(model.doc_ids.last().unwrap(), "dup");
}

#[test]
fn doc_vector_averages() {
    let corpus = vec![doc("a", &["x", "y"]), doc("b", &["y", "z"]), doc("c", &["z", "w"]), doc("d", &["w", "x"])];
    let cfg = TrainingConfig {
        dim: 4,
        negatives: 1,
        epochs: 1,
        ..small_config()
    };
    let model = train_word2vec(&corpus, &cfg).unwrap();
    let row = |t: &str| model.word_vector(t).unwrap().to_vec();

    let single = doc_vector_from_words(&model, &doc("q", &["y"]), WordWeighting::Tfidf);
    assert_eq!(single.vector, row("y"));
    assert!(!single.all_oov);

    let mid = doc_vector_from_words(&model, &doc("q", &["x", "z", "unknown"]), WordWeighting::Uniform);
    for k in 0..4 {
        assert_relative_eq!(mid.vector[k], (row("x")[k] + row("z")[k]) / 2.0, epsilon = 1e-7);
    }

    let oov = doc_vector_from_words(&model, &doc("q", &["nope"]), WordWeighting::Tfidf);
    assert!(oov.all_oov);
    assert!(oov.vector.iter().all(|&v| v == 0.0));
}

#[test]
fn doc_vector_tfidf_hand_computed() {
    // x in 1 of 4 docs, y in 2 of 4, z in 4 of 4 (zero idf)
    let corpus = vec![
        doc("a", &["x", "y", "z"]),
        doc("b", &["y", "z", "u"]),
        doc("c", &["z", "u", "v"]),
        doc("d", &["z", "v", "u"]),
    ];
    let cfg = TrainingConfig {
        dim: 3,
        negatives: 1,
        epochs: 1,
        ..small_config()
    };
    let model = train_word2vec(&corpus, &cfg).unwrap();
    let row = |t: &str| model.word_vector(t).unwrap().to_vec();
    let out = doc_vector_from_words(&model, &doc("q", &["x", "x", "y", "z"]), WordWeighting::Tfidf);
    let wx = 2.0 * 4f64.ln();
    let wy = 2f64.ln();
    for k in 0..3 {
        let expect = (wx * row("x")[k] as f64 + wy * row("y")[k] as f64) / (wx + wy);
        assert_relative_eq!(out.vector[k] as f64, expect, epsilon = 1e-6);
    }
    // all-zero idf falls back to the plain mean
    let flat = doc_vector_from_words(&model, &doc("q", &["z"]), WordWeighting::Tfidf);
    assert_eq!(flat.vector, row("z"));
}

#[test]
fn model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = capitals_corpus();
    for model in [
        train_word2vec(&corpus, &small_config()).unwrap(),
        train_doc2vec(&corpus, &TrainingConfig { epochs: 1, ..small_config() }).unwrap(),
    ] {
        let path = dir.path().join("model.bin");
        save_model(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[12..16], &(model.dim() as u32).to_le_bytes());
        assert_eq!(load_model(&path).unwrap(), model);
    }
    let dv = DocVectors {
        doc_ids: vec!["a".into(), "b".into()],
        vectors: ndarray::arr2(&[[1.0, 2.0], [3.0, -4.5]]),
    };
    let path = dir.path().join("docs.bin");
    dv.save(&path).unwrap();
    assert_eq!(DocVectors::load(&path).unwrap(), dv);
    std::fs::write(&path, b"garbage").unwrap();
    assert!(matches!(DocVectors::load(&path), Err(VectorizeError::Format(_))));
}
