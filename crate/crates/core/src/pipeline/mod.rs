//! Stage orchestration with content-hash caching.
//!
//! Each stage reads the outputs of its upstream stages from the work
//! directory, writes its own outputs under `<work>/<stage>/`, and records a
//! [`StageManifest`]. A stage whose input hashes and config section are
//! unchanged, and whose outputs are intact, is skipped.

mod compare;
mod config;
mod manifest;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use compare::{
    compare_assignments, compare_models, doc2vec_doc_vectors, index_labels, run_algorithm, train_embeddings,
    word2vec_doc_vectors, AlgorithmRun, ComparisonRow, ComparisonTable, Embeddings,
};
pub use config::{
    Algorithm, ClusterSettings, EntitySettings, EvalSettings, HarvestSettings, HarvestSource, PathsConfig,
    PhraseSettings, PipelineConfig, PrepSettings, ReportSettings, VectorizeSettings,
};
pub use manifest::{file_entry, list_files, sha256_bytes, sha256_file, StageManifest};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),
    #[error("stage {stage} requires stage {requires}; run it first")]
    MissingUpstream { stage: StageName, requires: StageName },
    #[error("reference labels missing for documents: {}", .0.join(", "))]
    MissingReference(Vec<String>),
    #[error("{0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Harvest(#[from] crate::harvest::HarvestError),
    #[error(transparent)]
    Prep(#[from] crate::textprep::PrepError),
    #[error(transparent)]
    Phrase(#[from] crate::phrasemine::PhraseError),
    #[error(transparent)]
    Vectorize(#[from] crate::vectorize::VectorizeError),
    #[error(transparent)]
    Cluster(#[from] crate::cluster::ClusterError),
    #[error(transparent)]
    Metric(#[from] crate::evalmetrics::MetricError),
    #[error(transparent)]
    Insight(#[from] crate::insight::InsightError),
    #[error(transparent)]
    Entity(#[from] crate::entities::EntityError),
}

impl PipelineError {
    /// Process exit code: 2 config, 3 upstream missing, 4 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::MissingUpstream { .. } => 3,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageName {
    Harvest,
    Prep,
    Phrases,
    Vectorize,
    Cluster,
    Eval,
    Report,
    Entities,
}

impl StageName {
    /// Execution order of `run all`.
    pub const ALL: [StageName; 8] = [
        StageName::Harvest,
        StageName::Prep,
        StageName::Phrases,
        StageName::Vectorize,
        StageName::Cluster,
        StageName::Eval,
        StageName::Report,
        StageName::Entities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StageName::Harvest => "harvest",
            StageName::Prep => "prep",
            StageName::Phrases => "phrases",
            StageName::Vectorize => "vectorize",
            StageName::Cluster => "cluster",
            StageName::Eval => "eval",
            StageName::Report => "report",
            StageName::Entities => "entities",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Stages whose outputs this stage reads.
    pub fn requires(self) -> &'static [StageName] {
        match self {
            StageName::Harvest => &[],
            StageName::Prep => &[StageName::Harvest],
            StageName::Phrases => &[StageName::Prep],
            StageName::Vectorize => &[StageName::Phrases],
            StageName::Cluster => &[StageName::Vectorize, StageName::Phrases],
            StageName::Eval => &[StageName::Cluster, StageName::Harvest],
            StageName::Report => &[StageName::Cluster, StageName::Harvest],
            StageName::Entities => &[StageName::Harvest],
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub manifest: StageManifest,
    pub skipped: bool,
}

/// Runs one stage, or returns its existing manifest when nothing changed and `force` is off.
pub fn run_stage(stage: StageName, cfg: &PipelineConfig, force: bool) -> Result<StageOutcome, PipelineError> {
    let work = cfg.work_dir();
    let mut inputs = BTreeMap::new();
    for &req in stage.requires() {
        let Some(upstream) = StageManifest::load(&work, req)? else {
            return Err(PipelineError::MissingUpstream { stage, requires: req });
        };
        for f in &upstream.outputs {
            let p = work.join(&f.name);
            if !p.is_file() {
                log::warn!("{} output {} is gone", req, f.name);
                return Err(PipelineError::MissingUpstream { stage, requires: req });
            }
            inputs.insert(f.name.clone(), sha256_file(&p)?);
        }
    }
    inputs.extend(stages::external_inputs(stage, cfg, &work)?);
    let snapshot = stages::config_snapshot(stage, cfg)?;
    let config_hash = sha256_bytes(&serde_json::to_vec(&snapshot)?);

    if !force {
        if let Some(prev) = StageManifest::load(&work, stage)? {
            if prev.is_current(&work, &inputs, &config_hash)? {
                log::info!("{stage}: inputs unchanged, skipping");
                return Ok(StageOutcome {
                    manifest: prev,
                    skipped: true,
                });
            }
        }
    }

    log::info!("{stage}: running");
    let start = Instant::now();
    let mut outputs = stages::execute(stage, cfg, &work)?;
    outputs.sort();
    outputs.dedup();
    let manifest = StageManifest {
        stage,
        inputs,
        config_hash,
        config: snapshot,
        outputs: outputs
            .iter()
            .map(|p| file_entry(&work, p))
            .collect::<Result<_, _>>()?,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    manifest.save(&work)?;
    log::info!("{stage}: done in {:.2}s, {} outputs", manifest.wall_time_secs, manifest.outputs.len());
    Ok(StageOutcome {
        manifest,
        skipped: false,
    })
}

/// Runs every stage in order.
pub fn run_all(cfg: &PipelineConfig, force: bool) -> Result<Vec<StageOutcome>, PipelineError> {
    StageName::ALL.iter().map(|&s| run_stage(s, cfg, force)).collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| PipelineError::Runtime(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}
