use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::cluster::{ChunkSeqConfig, LdaConfig};
use crate::entities::{DEFAULT_MIN_OCCURRENCES, DEFAULT_TOP_AUTHORS};
use crate::evalmetrics::AverageMethod;
use crate::harvest::{CategoryCode, HarvestQuery, DEFAULT_PAGE_SIZE, FIRST_YEAR, MAX_PAGE_SIZE, QFIN_CATEGORIES};
use crate::insight::{TsneConfig, DEFAULT_TOP_N};
use crate::vectorize::{TrainingConfig, WordWeighting, DEFAULT_MAX_DF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Record store read by the `local` harvest source.
    pub records: PathBuf,
    /// Directory of `<id>.txt` full texts.
    pub texts: PathBuf,
    pub work_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            records: "records.ndjson".into(),
            texts: "texts".into(),
            work_dir: "work".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarvestSource {
    /// Copy an existing record store.
    #[default]
    Local,
    /// Saved feed pages `page_<offset>.xml`.
    Dir,
    Api,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestSettings {
    pub source: HarvestSource,
    pub fixture_dir: Option<PathBuf>,
    pub categories: Vec<String>,
    pub from_year: i32,
    /// `None` means the current year.
    pub to_year: Option<i32>,
    pub page_size: usize,
    pub max_records: Option<usize>,
    pub request_delay_secs: f64,
}

impl Default for HarvestSettings {
    fn default() -> Self {
        Self {
            source: HarvestSource::Local,
            fixture_dir: None,
            categories: QFIN_CATEGORIES.iter().map(|c| c.to_string()).collect(),
            from_year: FIRST_YEAR,
            to_year: None,
            page_size: DEFAULT_PAGE_SIZE,
            max_records: None,
            request_delay_secs: 3.0,
        }
    }
}

impl HarvestSettings {
    pub fn query(&self) -> Result<HarvestQuery, PipelineError> {
        let categories = self
            .categories
            .iter()
            .map(|c| CategoryCode::parse(c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut q = HarvestQuery {
            categories,
            from_year: self.from_year,
            page_size: self.page_size,
            max_records: self.max_records,
            ..HarvestQuery::default()
        };
        if let Some(y) = self.to_year {
            q.to_year = y;
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepSettings {
    pub min_count: u64,
    pub english_stopwords: Option<PathBuf>,
    pub domain_stopwords: Option<PathBuf>,
    pub drop_non_english: bool,
}

impl Default for PrepSettings {
    fn default() -> Self {
        Self {
            min_count: crate::textprep::DEFAULT_MIN_COUNT,
            english_stopwords: None,
            domain_stopwords: None,
            drop_non_english: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhraseSettings {
    pub passes: usize,
    pub min_count: u64,
    pub threshold: f64,
}

impl Default for PhraseSettings {
    fn default() -> Self {
        Self {
            passes: 2,
            min_count: crate::phrasemine::DEFAULT_MIN_COUNT,
            threshold: crate::phrasemine::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorizeSettings {
    pub max_df: f64,
    /// How Word2Vec word vectors are pooled into document vectors.
    pub doc_weighting: WordWeighting,
    pub word2vec: TrainingConfig,
    pub doc2vec: TrainingConfig,
}

impl Default for VectorizeSettings {
    fn default() -> Self {
        Self {
            max_df: DEFAULT_MAX_DF,
            doc_weighting: WordWeighting::Tfidf,
            word2vec: TrainingConfig::default(),
            doc2vec: TrainingConfig::doc2vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// K-means on the TF-IDF matrix.
    Kmeans,
    /// Argmax topic of LDA on term counts.
    Lda,
    Word2vecKmeans,
    Doc2vecKmeans,
    /// K-means on embedded chunk-topic sequences.
    Chunkseq,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Kmeans,
        Algorithm::Lda,
        Algorithm::Word2vecKmeans,
        Algorithm::Doc2vecKmeans,
        Algorithm::Chunkseq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::Lda => "lda",
            Algorithm::Word2vecKmeans => "word2vec-kmeans",
            Algorithm::Doc2vecKmeans => "doc2vec-kmeans",
            Algorithm::Chunkseq => "chunkseq",
        }
    }

    /// Display name used in comparison tables.
    pub fn title(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "K-means",
            Algorithm::Lda => "LDA",
            Algorithm::Word2vecKmeans => "Word2Vec K-means",
            Algorithm::Doc2vecKmeans => "Doc2Vec K-means",
            Algorithm::Chunkseq => "Chunk-sequence K-means",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSettings {
    pub k: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Assignment used by the report stage.
    pub primary: Algorithm,
    pub kmeans_n_init: usize,
    pub kmeans_max_iter: usize,
    /// `k` and `seed` are taken from this section.
    pub lda: LdaConfig,
    /// `final_k` and `seed` are taken from this section.
    pub chunkseq: ChunkSeqConfig,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        Self {
            k: QFIN_CATEGORIES.len(),
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            primary: Algorithm::Doc2vecKmeans,
            kmeans_n_init: 10,
            kmeans_max_iter: 300,
            lda: LdaConfig::default(),
            chunkseq: ChunkSeqConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub nmi_average: AverageMethod,
    /// `doc_id,label` file; the records' reference categories when unset.
    pub reference_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    pub labels: Option<PathBuf>,
    pub top_n: usize,
    pub projection: bool,
    pub tsne: TsneConfig,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            labels: None,
            top_n: DEFAULT_TOP_N,
            projection: true,
            tsne: TsneConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntitySettings {
    pub first_names: Option<PathBuf>,
    pub journal_aliases: Option<PathBuf>,
    pub exclude_names: Option<PathBuf>,
    pub top_authors: usize,
    pub min_journal_occurrences: u64,
}

impl Default for EntitySettings {
    fn default() -> Self {
        Self {
            first_names: None,
            journal_aliases: None,
            exclude_names: None,
            top_authors: DEFAULT_TOP_AUTHORS,
            min_journal_occurrences: DEFAULT_MIN_OCCURRENCES,
        }
    }
}

/// The whole pipeline configuration, one TOML section per stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub harvest: HarvestSettings,
    pub prep: PrepSettings,
    pub phrases: PhraseSettings,
    pub vectorize: VectorizeSettings,
    pub cluster: ClusterSettings,
    pub eval: EvalSettings,
    pub report: ReportSettings,
    pub entities: EntitySettings,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    /// Parses a config file and validates it.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| PipelineError::Config(vec![format!("{}: {e}", path.display())]))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn work_dir(&self) -> PathBuf {
        self.resolve(&self.paths.work_dir)
    }

    pub fn records_path(&self) -> PathBuf {
        self.resolve(&self.paths.records)
    }

    pub fn texts_dir(&self) -> PathBuf {
        self.resolve(&self.paths.texts)
    }

    /// Checks every setting and reports all violations together.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut errs = Vec::new();
        let need_file = |label: &str, p: &Option<PathBuf>, errs: &mut Vec<String>| {
            if let Some(p) = p {
                if !self.resolve(p).is_file() {
                    errs.push(format!("{label}: file {} does not exist", p.display()));
                }
            }
        };

        let h = &self.harvest;
        match h.source {
            HarvestSource::Local if !self.records_path().is_file() => errs.push(format!(
                "paths.records: file {} does not exist",
                self.paths.records.display()
            )),
            HarvestSource::Dir => match &h.fixture_dir {
                None => errs.push("harvest.fixture_dir is required when harvest.source = \"dir\"".into()),
                Some(d) if !self.resolve(d).is_dir() => {
                    errs.push(format!("harvest.fixture_dir: directory {} does not exist", d.display()))
                }
                _ => {}
            },
            _ => {}
        }
        if !self.texts_dir().is_dir() {
            errs.push(format!("paths.texts: directory {} does not exist", self.paths.texts.display()));
        }
        for c in &h.categories {
            if CategoryCode::parse(c).is_err() {
                errs.push(format!("harvest.categories: invalid code {c:?}"));
            }
        }
        if h.categories.is_empty() {
            errs.push("harvest.categories must not be empty".into());
        }
        if h.page_size == 0 || h.page_size > MAX_PAGE_SIZE {
            errs.push(format!("harvest.page_size must be in 1..={MAX_PAGE_SIZE}, got {}", h.page_size));
        }
        if h.to_year.is_some_and(|y| y < h.from_year) {
            errs.push(format!("harvest.to_year is before from_year {}", h.from_year));
        }
        if !(h.request_delay_secs >= 0.0 && h.request_delay_secs.is_finite()) {
            errs.push("harvest.request_delay_secs must be a non-negative number".into());
        }

        if self.prep.min_count == 0 {
            errs.push("prep.min_count must be >= 1".into());
        }
        need_file("prep.english_stopwords", &self.prep.english_stopwords, &mut errs);
        need_file("prep.domain_stopwords", &self.prep.domain_stopwords, &mut errs);

        if !self.phrases.threshold.is_finite() {
            errs.push("phrases.threshold must be finite".into());
        }

        let v = &self.vectorize;
        if !(v.max_df > 0.0 && v.max_df <= 1.0) {
            errs.push(format!("vectorize.max_df must be in (0, 1], got {}", v.max_df));
        }
        for (name, t) in [("word2vec", &v.word2vec), ("doc2vec", &v.doc2vec)] {
            check_training(&format!("vectorize.{name}"), t, &mut errs);
        }

        let c = &self.cluster;
        if c.k < 2 {
            errs.push(format!("cluster.k must be >= 2, got {}", c.k));
        }
        if c.algorithms.is_empty() {
            errs.push("cluster.algorithms must not be empty".into());
        }
        let mut seen = c.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != c.algorithms.len() {
            errs.push("cluster.algorithms lists an algorithm twice".into());
        }
        if !c.algorithms.contains(&c.primary) {
            errs.push(format!("cluster.primary {:?} is not in cluster.algorithms", c.primary.name()));
        }
        if c.kmeans_n_init == 0 || c.kmeans_max_iter == 0 {
            errs.push("cluster.kmeans_n_init and cluster.kmeans_max_iter must be >= 1".into());
        }
        if !(c.lda.beta > 0.0) || c.lda.alpha.is_some_and(|a| !(a > 0.0)) {
            errs.push("cluster.lda priors must be positive".into());
        }
        if c.lda.iterations == 0 || c.chunkseq.lda_iterations == 0 {
            errs.push("cluster LDA iteration counts must be >= 1".into());
        }
        if c.chunkseq.chunk_size == 0 || c.chunkseq.chunk_model_k < 1 {
            errs.push("cluster.chunkseq.chunk_size and chunk_model_k must be >= 1".into());
        }
        check_training("cluster.chunkseq.embedding", &c.chunkseq.embedding, &mut errs);

        need_file("eval.reference_labels", &self.eval.reference_labels, &mut errs);

        let r = &self.report;
        need_file("report.labels", &r.labels, &mut errs);
        if r.top_n == 0 {
            errs.push("report.top_n must be >= 1".into());
        }
        if !(r.tsne.perplexity > 0.0 && r.tsne.learning_rate > 0.0 && r.tsne.early_exaggeration >= 1.0) {
            errs.push("report.tsne needs perplexity > 0, learning_rate > 0 and early_exaggeration >= 1".into());
        }

        let e = &self.entities;
        need_file("entities.first_names", &e.first_names, &mut errs);
        need_file("entities.journal_aliases", &e.journal_aliases, &mut errs);
        need_file("entities.exclude_names", &e.exclude_names, &mut errs);

        if errs.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Config(errs))
        }
    }
}

fn check_training(prefix: &str, t: &TrainingConfig, errs: &mut Vec<String>) {
    if t.dim < 2 {
        errs.push(format!("{prefix}.dim must be >= 2"));
    }
    if t.window == 0 || t.workers == 0 || t.epochs == 0 {
        errs.push(format!("{prefix}: window, workers and epochs must be >= 1"));
    }
    if !(t.alpha > 0.0 && t.min_alpha >= 0.0 && t.min_alpha <= t.alpha) {
        errs.push(format!("{prefix}: need 0 <= min_alpha <= alpha and alpha > 0"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_violation_is_listed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.toml");
        fs::write(
            &path,
            "[vectorize]\nmax_df = 1.5\n[cluster]\nk = 1\nalgorithms = [\"lda\"]\nprimary = \"kmeans\"\n",
        )
        .unwrap();
        let Err(PipelineError::Config(errs)) = PipelineConfig::load(&path) else {
            panic!("expected config errors")
        };
        let joined = errs.join("\n");
        for needle in ["paths.records", "paths.texts", "max_df", "cluster.k", "cluster.primary"] {
            assert!(joined.contains(needle), "{needle} missing from {joined}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.toml");
        fs::write(&path, "[prep]\nmin_cnt = 3\n").unwrap();
        assert!(matches!(PipelineConfig::load(&path), Err(PipelineError::Config(_))));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()), Some(a));
            let s = toml::to_string(&ClusterSettings { primary: a, ..Default::default() }).unwrap();
            assert!(s.contains(&format!("primary = \"{}\"", a.name())));
        }
    }
}
