use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ClusterSettings, VectorizeSettings};
use super::PipelineError;
use crate::cluster::{
    chunk_topic_sequence_cluster, kmeans, lda_doc_labels, lda_fit, ChunkSeqConfig, ClusterAssignment, KmeansConfig,
    LdaConfig, LdaModel,
};
use crate::evalmetrics::{evaluate_with, AverageMethod, MetricReport};
use crate::textprep::TokenDoc;
use crate::vectorize::{
    build_matrix, doc_vector_from_words, train_doc2vec, train_word2vec, DocVectors, EmbeddingModel, Weighting,
    WordWeighting,
};

/// Document vectors of the two embedding models, in corpus order.
#[derive(Debug, Clone, Default)]
pub struct Embeddings {
    pub word2vec: Option<DocVectors>,
    pub doc2vec: Option<DocVectors>,
}

pub fn word2vec_doc_vectors(model: &EmbeddingModel, corpus: &[TokenDoc], weighting: WordWeighting) -> DocVectors {
    let mut vectors = Array2::zeros((corpus.len(), model.dim()));
    let mut oov = 0;
    for (i, doc) in corpus.iter().enumerate() {
        let v = doc_vector_from_words(model, doc, weighting);
        oov += v.all_oov as usize;
        vectors.row_mut(i).assign(&ndarray::ArrayView1::from(&v.vector));
    }
    if oov > 0 {
        log::warn!("{oov} documents have no in-vocabulary word and get a zero vector");
    }
    DocVectors {
        doc_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
        vectors,
    }
}

pub fn doc2vec_doc_vectors(model: &EmbeddingModel) -> DocVectors {
    DocVectors {
        doc_ids: model.doc_ids.clone(),
        vectors: model.doc_vectors.clone().expect("doc2vec model carries document vectors"),
    }
}

/// Trains whichever embedding models `algorithms` need.
pub fn train_embeddings(
    corpus: &[TokenDoc],
    settings: &VectorizeSettings,
    algorithms: &[Algorithm],
) -> Result<Embeddings, PipelineError> {
    let mut out = Embeddings::default();
    if algorithms.contains(&Algorithm::Word2vecKmeans) {
        let m = train_word2vec(corpus, &settings.word2vec)?;
        out.word2vec = Some(word2vec_doc_vectors(&m, corpus, settings.doc_weighting));
    }
    if algorithms.contains(&Algorithm::Doc2vecKmeans) {
        out.doc2vec = Some(doc2vec_doc_vectors(&train_doc2vec(corpus, &settings.doc2vec)?));
    }
    Ok(out)
}

pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub assignment: ClusterAssignment,
    /// Representation the assignment was computed from, one row per document.
    pub vectors: Array2<f64>,
    pub lda: Option<LdaModel>,
}

fn kmeans_config(settings: &ClusterSettings) -> KmeansConfig {
    KmeansConfig {
        k: settings.k,
        seed: settings.seed,
        max_iter: settings.kmeans_max_iter,
        n_init: settings.kmeans_n_init,
        normalize: true,
        ..KmeansConfig::default()
    }
}

fn kmeans_run(
    algorithm: Algorithm,
    points: Array2<f64>,
    doc_ids: Vec<String>,
    settings: &ClusterSettings,
) -> Result<AlgorithmRun, PipelineError> {
    let assignment = kmeans(&points, &kmeans_config(settings))?.into_assignment(doc_ids, algorithm.name())?;
    Ok(AlgorithmRun {
        algorithm,
        assignment,
        vectors: points,
        lda: None,
    })
}

fn embedded(
    dv: Option<&DocVectors>,
    corpus: &[TokenDoc],
    needed: &str,
) -> Result<Array2<f64>, PipelineError> {
    let dv = dv.ok_or_else(|| PipelineError::Runtime(format!("{needed} document vectors are missing")))?;
    if dv.doc_ids.iter().ne(corpus.iter().map(|d| &d.doc_id)) {
        return Err(PipelineError::Runtime(format!(
            "{needed} document vectors do not match the corpus documents"
        )));
    }
    Ok(dv.vectors.mapv(f64::from))
}

pub fn run_algorithm(
    algorithm: Algorithm,
    corpus: &[TokenDoc],
    settings: &ClusterSettings,
    max_df: f64,
    embeddings: &Embeddings,
) -> Result<AlgorithmRun, PipelineError> {
    let ids = || corpus.iter().map(|d| d.doc_id.clone()).collect::<Vec<_>>();
    match algorithm {
        Algorithm::Kmeans => {
            // dense TF-IDF; memory grows with documents × vocabulary
            let m = build_matrix(corpus, max_df, Weighting::Tfidf)?;
            kmeans_run(algorithm, m.to_dense(), ids(), settings)
        }
        Algorithm::Lda => {
            let m = build_matrix(corpus, max_df, Weighting::Count)?;
            let model = lda_fit(
                &m,
                &LdaConfig {
                    k: settings.k,
                    seed: settings.seed,
                    ..settings.lda.clone()
                },
            )?;
            let mut assignment = lda_doc_labels(&model);
            assignment.model_tag = algorithm.name().into();
            Ok(AlgorithmRun {
                algorithm,
                assignment,
                vectors: model.doc_topic_distribution(),
                lda: Some(model),
            })
        }
        Algorithm::Word2vecKmeans => {
            let v = embedded(embeddings.word2vec.as_ref(), corpus, "word2vec")?;
            kmeans_run(algorithm, v, ids(), settings)
        }
        Algorithm::Doc2vecKmeans => {
            let v = embedded(embeddings.doc2vec.as_ref(), corpus, "doc2vec")?;
            kmeans_run(algorithm, v, ids(), settings)
        }
        Algorithm::Chunkseq => {
            let r = chunk_topic_sequence_cluster(
                corpus,
                &ChunkSeqConfig {
                    final_k: settings.k,
                    seed: settings.seed,
                    kmeans_n_init: settings.kmeans_n_init,
                    ..settings.chunkseq.clone()
                },
            )?;
            let mut assignment = r.assignment;
            assignment.model_tag = algorithm.name().into();
            Ok(AlgorithmRun {
                algorithm,
                assignment,
                vectors: r.doc_vectors,
                lda: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub metrics: MetricReport,
}

/// Algorithms as rows, the six agreement scores as columns.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("algorithm,{}\n", MetricReport::COLUMNS.join(","));
        for r in &self.rows {
            let vals: Vec<String> = r.metrics.values().iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(s, "{},{}", r.algorithm, vals.join(","));
        }
        s
    }

    /// Markdown table with each column's maximum in bold.
    pub fn to_markdown(&self) -> String {
        let mut best = [f64::NEG_INFINITY; 6];
        for r in &self.rows {
            for (b, v) in best.iter_mut().zip(r.metrics.values()) {
                *b = b.max(v);
            }
        }
        let mut s = format!("| | {} |\n|---|{}\n", MetricReport::COLUMNS.join(" | "), "---|".repeat(6));
        for r in &self.rows {
            let cells: Vec<String> = r
                .metrics
                .values()
                .iter()
                .zip(best)
                .map(|(&v, b)| if v == b { format!("**{v:.3}**") } else { format!("{v:.3}") })
                .collect();
            let _ = writeln!(s, "| {} | {} |", r.algorithm, cells.join(" | "));
        }
        s
    }
}

/// Maps label names to indices in sorted name order.
pub fn index_labels(labels: &BTreeMap<String, String>) -> BTreeMap<String, usize> {
    let names: BTreeSet<&String> = labels.values().collect();
    let index: BTreeMap<&String, usize> = names.into_iter().enumerate().map(|(i, n)| (n, i)).collect();
    labels.iter().map(|(d, l)| (d.clone(), index[l])).collect()
}

/// Scores each assignment against `reference`; every assigned document must have a reference label.
pub fn compare_assignments(
    runs: &[(&str, &ClusterAssignment)],
    reference: &BTreeMap<String, usize>,
    nmi_average: AverageMethod,
) -> Result<ComparisonTable, PipelineError> {
    let mut rows = Vec::with_capacity(runs.len());
    for (name, a) in runs {
        let missing: Vec<String> = a.doc_ids.iter().filter(|d| !reference.contains_key(*d)).cloned().collect();
        if !missing.is_empty() {
            return Err(PipelineError::MissingReference(missing));
        }
        let truth: Vec<usize> = a.doc_ids.iter().map(|d| reference[d]).collect();
        rows.push(ComparisonRow {
            algorithm: name.to_string(),
            metrics: evaluate_with(&truth, &a.labels, nmi_average)?,
        });
    }
    Ok(ComparisonTable { rows })
}

/// Runs every configured algorithm at the same `k` on `corpus` and scores each
/// against the reference labels.
pub fn compare_models(
    corpus: &[TokenDoc],
    reference: &BTreeMap<String, usize>,
    vectorize: &VectorizeSettings,
    cluster: &ClusterSettings,
    nmi_average: AverageMethod,
) -> Result<ComparisonTable, PipelineError> {
    let missing: Vec<String> = corpus
        .iter()
        .filter(|d| !reference.contains_key(&d.doc_id))
        .map(|d| d.doc_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(PipelineError::MissingReference(missing));
    }
    let emb = train_embeddings(corpus, vectorize, &cluster.algorithms)?;
    let runs = cluster
        .algorithms
        .iter()
        .map(|&a| run_algorithm(a, corpus, cluster, vectorize.max_df, &emb))
        .collect::<Result<Vec<_>, _>>()?;
    let named: Vec<(&str, &ClusterAssignment)> = runs.iter().map(|r| (r.algorithm.title(), &r.assignment)).collect();
    compare_assignments(&named, reference, nmi_average)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::Stage;

    fn report(v: f64) -> MetricReport {
        MetricReport {
            rs: v,
            ars: v,
            mi: v,
            nmi: v,
            ca: v,
            ps: 1.0 - v,
            n: 4,
            k_true: 2,
            k_pred: 2,
        }
    }

    #[test]
    fn markdown_bolds_column_maxima() {
        let t = ComparisonTable {
            rows: vec![
                ComparisonRow { algorithm: "a".into(), metrics: report(0.25) },
                ComparisonRow { algorithm: "b".into(), metrics: report(0.5) },
            ],
        };
        let md = t.to_markdown();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[2], "| a | 0.250 | 0.250 | 0.250 | 0.250 | 0.250 | **0.750** |");
        assert_eq!(lines[3], "| b | **0.500** | **0.500** | **0.500** | **0.500** | **0.500** | 0.500 |");
        assert!(t.to_csv().starts_with("algorithm,RS,ARS,MI,NMI,CA,PS\na,0.250000,"));
    }

    #[test]
    fn missing_reference_lists_ids() {
        let a = ClusterAssignment::new(vec!["x".into(), "y".into(), "z".into()], vec![0, 1, 0], 2, "t", None).unwrap();
        let reference = BTreeMap::from([("x".to_string(), 0)]);
        match compare_assignments(&[("t", &a)], &reference, AverageMethod::Arithmetic) {
            Err(PipelineError::MissingReference(ids)) => assert_eq!(ids, vec!["y", "z"]),
            other => panic!("unexpected {:?}", other.map(|t| t.rows.len())),
        }
    }

    #[test]
    fn single_algorithm_one_row() {
        let words = |w: &str| (0..30).map(|i| format!("{w}{}", i % 6)).collect::<Vec<_>>();
        let corpus: Vec<TokenDoc> = (0..12)
            .map(|i| TokenDoc::new(format!("d{i:02}"), Stage::Cleaned, words(if i % 2 == 0 { "alpha" } else { "beta" })))
            .collect();
        let reference: BTreeMap<String, usize> = corpus.iter().enumerate().map(|(i, d)| (d.doc_id.clone(), i % 2)).collect();
        let cluster = ClusterSettings {
            k: 2,
            algorithms: vec![Algorithm::Kmeans],
            primary: Algorithm::Kmeans,
            ..Default::default()
        };
        let t = compare_models(&corpus, &reference, &VectorizeSettings { max_df: 1.0, ..Default::default() }, &cluster, AverageMethod::Arithmetic).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].algorithm, "K-means");
        assert_eq!(t.rows[0].metrics.ca, 1.0);
    }

    #[test]
    fn label_names_indexed_in_order() {
        let m = BTreeMap::from([
            ("a".to_string(), "q-fin.ST".to_string()),
            ("b".to_string(), "q-fin.CP".to_string()),
            ("c".to_string(), "q-fin.ST".to_string()),
        ]);
        let idx = index_labels(&m);
        assert_eq!((idx["a"], idx["b"], idx["c"]), (1, 0, 1));
    }
}
