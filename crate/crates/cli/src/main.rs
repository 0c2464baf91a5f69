//! `corpusminer`: each pipeline stage as a subcommand.
//!
//! With `--config` a subcommand runs its stage inside the cached pipeline
//! (flags given alongside override the config). Without it, the stage runs
//! once on explicit input and output paths.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use corpusminer::cluster::ClusterAssignment;
use corpusminer::entities::{mine_entities, rank_entities, write_ranking, EntityResources};
use corpusminer::evalmetrics::{evaluate_with, AverageMethod};
use corpusminer::harvest::{harvest_all, load_records, store_records, ApiSource, DirSource, HarvestQuery};
use corpusminer::insight::{
    annotate, apply_merges, default_labels, emit_reports, read_labels, representatives, topic_trends, tsne,
    year_index, ReportInput, TsneConfig,
};
use corpusminer::phrasemine::mine_phrases;
use corpusminer::pipeline::{
    index_labels, read_jsonl, run_algorithm, run_all, run_stage, train_embeddings, write_jsonl, Algorithm,
    ClusterSettings, Embeddings, PipelineConfig, PipelineError, StageName, StageOutcome, VectorizeSettings,
};
use corpusminer::sample::{generate_sample, write_sample, DEFAULT_SAMPLE_DOCS, DEFAULT_SAMPLE_SEED};
use corpusminer::textprep::{
    clean_corpus, flesch_score, frequency_table, lemmatize, tokenize, StopwordConfig, TokenDoc, DEFAULT_MIN_COUNT,
};
use corpusminer::vectorize::{
    doc_vector_from_words, save_model, train_doc2vec, train_word2vec, DocVectors, TrainingConfig, WordWeighting,
};

/// Bad or missing command-line input; exits with code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Parser)]
#[command(name = "corpusminer", version, about = "Topic-trend mining over preprint corpora")]
struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Pipeline config file; runs the stage with caching.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rerun even when inputs are unchanged.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage, or `all`, from a config file.
    Run {
        stage: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Fetch metadata records.
    Harvest(HarvestArgs),
    /// Tokenize, lemmatize and clean texts.
    Prep(PrepArgs),
    /// Merge frequent bigrams into phrases.
    Phrases(PhraseArgs),
    /// Train Word2Vec / Doc2Vec models.
    Vectorize(VectorizeArgs),
    /// Cluster documents.
    Cluster(ClusterArgs),
    /// Score predicted labels against reference labels.
    Eval(EvalArgs),
    /// Topic summaries, trends and projection.
    Report(ReportArgs),
    /// Rank cited authors and journals.
    Entities(EntityArgs),
    /// Write the seeded synthetic sample corpus.
    Sample {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_DOCS)]
        docs: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct HarvestArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Category code, repeatable (default: all q-fin categories).
    #[arg(long = "category")]
    categories: Vec<String>,
    #[arg(long)]
    from_year: Option<i32>,
    #[arg(long)]
    to_year: Option<i32>,
    #[arg(long)]
    page_size: Option<usize>,
    #[arg(long)]
    max_records: Option<usize>,
    /// Read saved feed pages instead of calling the API.
    #[arg(long)]
    fixture_dir: Option<PathBuf>,
    /// Record store to upsert into.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrepStage {
    Raw,
    Lemma,
    Clean,
}

#[derive(Args)]
struct PrepArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_enum)]
    stage: Option<PrepStage>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    english_stopwords: Option<PathBuf>,
    #[arg(long)]
    domain_stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct PhraseArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    Word2vec,
    Doc2vec,
    Both,
}

#[derive(Args)]
struct VectorizeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    model: ModelChoice,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// kmeans, lda, word2vec-kmeans, doc2vec-kmeans or chunkseq.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Phrase-stage corpus (direct mode).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Precomputed document vectors for the embedding algorithms.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Assignment CSV (direct mode).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Reference `doc_id,label` file.
    #[arg(long = "true")]
    true_labels: Option<PathBuf>,
    /// Predicted `doc_id,label` file.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    nmi_average: Option<Average>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Average {
    Min,
    Geometric,
    Arithmetic,
    Max,
}

impl From<Average> for AverageMethod {
    fn from(a: Average) -> Self {
        match a {
            Average::Min => AverageMethod::Min,
            Average::Geometric => AverageMethod::Geometric,
            Average::Arithmetic => AverageMethod::Arithmetic,
            Average::Max => AverageMethod::Max,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Skip the 2-D projection.
    #[arg(long)]
    no_projection: bool,
}

#[derive(Args)]
struct EntityArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    texts: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    first_names: Option<PathBuf>,
    #[arg(long)]
    journal_aliases: Option<PathBuf>,
    #[arg(long)]
    exclude_names: Option<PathBuf>,
    #[arg(long)]
    top_authors: Option<usize>,
    #[arg(long)]
    min_occurrences: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if let Some(p) = e.downcast_ref::<PipelineError>() {
                p.exit_code()
            } else if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                4
            };
            ExitCode::from(code as u8)
        }
    }
}

fn report_outcome(o: &StageOutcome) {
    let m = &o.manifest;
    if o.skipped {
        println!("{:<10} skipped (up to date)", m.stage.name());
    } else {
        println!("{:<10} ran in {:.2}s, {} output files", m.stage.name(), m.wall_time_secs, m.outputs.len());
    }
}

/// Loads the config, applies `edit`, revalidates and runs `stage`.
fn configured(p: &PipelineArgs, stage: StageName, edit: impl FnOnce(&mut PipelineConfig) -> Result<()>) -> Result<()> {
    let path = p.config.as_ref().expect("checked by caller");
    let mut cfg = PipelineConfig::load(path)?;
    edit(&mut cfg)?;
    cfg.validate()?;
    report_outcome(&run_stage(stage, &cfg, p.force)?);
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { stage, config, force } => {
            let cfg = PipelineConfig::load(&config)?;
            if stage == "all" {
                for o in run_all(&cfg, force)? {
                    report_outcome(&o);
                }
            } else {
                let Some(s) = StageName::parse(&stage) else {
                    return usage(format!("unknown stage {stage:?}"));
                };
                report_outcome(&run_stage(s, &cfg, force)?);
            }
            Ok(())
        }
        Command::Harvest(a) => harvest(a),
        Command::Prep(a) => prep(a),
        Command::Phrases(a) => phrases(a),
        Command::Vectorize(a) => vectorize(a),
        Command::Cluster(a) => cluster(a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
        Command::Entities(a) => entities(a),
        Command::Sample { out, docs, seed } => {
            write_sample(&generate_sample(docs, seed), &out)?;
            println!("wrote {docs} documents to {}", out.display());
            Ok(())
        }
    }
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    match v {
        Some(x) => Ok(x),
        None => usage(format!("{flag} is required without --config")),
    }
}

/// A directory argument resolves to `dir/name`; a file is used as is.
fn in_file(p: &Path, name: &str) -> PathBuf {
    if p.is_dir() {
        p.join(name)
    } else {
        p.to_path_buf()
    }
}

fn harvest(a: HarvestArgs) -> Result<()> {
    let apply = |h: &mut corpusminer::pipeline::HarvestSettings| {
        if !a.categories.is_empty() {
            h.categories = a.categories.clone();
        }
        if let Some(y) = a.from_year {
            h.from_year = y;
        }
        if a.to_year.is_some() {
            h.to_year = a.to_year;
        }
        if let Some(p) = a.page_size {
            h.page_size = p;
        }
        if a.max_records.is_some() {
            h.max_records = a.max_records;
        }
    };
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Harvest, |c| {
            apply(&mut c.harvest);
            Ok(())
        });
    }
    let out = required(&a.out, "--out")?;
    let mut settings = corpusminer::pipeline::HarvestSettings::default();
    apply(&mut settings);
    let query: HarvestQuery = settings.query().map_err(|e| UsageError(e.to_string()))?;
    query.validate().map_err(|e| UsageError(e.to_string()))?;
    let records = match &a.fixture_dir {
        Some(d) => harvest_all(&mut DirSource::new(d), &query)?,
        None => harvest_all(&mut ApiSource::new(), &query)?,
    };
    let n = store_records(&records, out)?;
    println!("stored {n} records in {}", out.display());
    Ok(())
}

fn read_txt_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "txt"));
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let id = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok((id, fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?))
        })
        .collect()
}

fn prep(a: PrepArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Prep, |c| {
            if let Some(m) = a.min_count {
                c.prep.min_count = m;
            }
            if a.english_stopwords.is_some() {
                c.prep.english_stopwords = a.english_stopwords.clone();
            }
            if a.domain_stopwords.is_some() {
                c.prep.domain_stopwords = a.domain_stopwords.clone();
            }
            Ok(())
        });
    }
    let stage = required(&a.stage, "--stage")?;
    let input = required(&a.input, "--in")?;
    let out = required(&a.out, "--out")?;
    fs::create_dir_all(out)?;
    match stage {
        PrepStage::Raw => {
            let texts = read_txt_dir(input)?;
            let raw: Vec<TokenDoc> = texts.iter().map(|(id, t)| tokenize(id, t)).collect();
            write_jsonl(&out.join("raw.jsonl"), &raw)?;
            let mut w = csv::Writer::from_path(out.join("readability.csv"))?;
            for (id, t) in &texts {
                w.serialize(flesch_score(id, t))?;
            }
            w.flush()?;
            println!("tokenized {} documents", raw.len());
        }
        PrepStage::Lemma => {
            let raw: Vec<TokenDoc> = read_jsonl(&in_file(input, "raw.jsonl"))?;
            let lem = raw.iter().map(lemmatize).collect::<Result<Vec<_>, _>>()?;
            write_jsonl(&out.join("lemmatized.jsonl"), &lem)?;
            println!("lemmatized {} documents", lem.len());
        }
        PrepStage::Clean => {
            let lem: Vec<TokenDoc> = read_jsonl(&in_file(input, "lemmatized.jsonl"))?;
            let stop = StopwordConfig::from_files(a.english_stopwords.as_deref(), a.domain_stopwords.as_deref())?;
            let cleaned = clean_corpus(&lem, &stop, a.min_count.unwrap_or(DEFAULT_MIN_COUNT))?;
            write_jsonl(&out.join("cleaned.jsonl"), &cleaned)?;
            let mut w = csv::Writer::from_path(out.join("frequencies.csv"))?;
            w.write_record(["token", "count", "percent"])?;
            for f in frequency_table(&cleaned)? {
                w.write_record([f.token.clone(), f.count.to_string(), f.percent().to_string()])?;
            }
            w.flush()?;
            println!("cleaned {} documents", cleaned.len());
        }
    }
    Ok(())
}

fn phrases(a: PhraseArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Phrases, |c| {
            if let Some(p) = a.passes {
                c.phrases.passes = p;
            }
            if let Some(m) = a.min_count {
                c.phrases.min_count = m;
            }
            if let Some(t) = a.threshold {
                c.phrases.threshold = t;
            }
            Ok(())
        });
    }
    let input = required(&a.input, "--in")?;
    let out = required(&a.out, "--out")?;
    let defaults = corpusminer::pipeline::PhraseSettings::default();
    let corpus: Vec<TokenDoc> = read_jsonl(&in_file(input, "cleaned.jsonl"))?;
    let (merged, models) = mine_phrases(
        &corpus,
        a.passes.unwrap_or(defaults.passes),
        a.min_count.unwrap_or(defaults.min_count),
        a.threshold.unwrap_or(defaults.threshold),
    )?;
    fs::create_dir_all(out)?;
    for (i, m) in models.iter().enumerate() {
        m.save(&out.join(format!("model_{}.json", i + 1)))?;
    }
    write_jsonl(&out.join("corpus.jsonl"), &merged)?;
    println!("{} passes, corpus written to {}", models.len(), out.display());
    Ok(())
}

fn training(base: TrainingConfig, a: &VectorizeArgs) -> TrainingConfig {
    TrainingConfig {
        dim: a.dim.unwrap_or(base.dim),
        epochs: a.epochs.unwrap_or(base.epochs),
        seed: a.seed.unwrap_or(base.seed),
        ..base
    }
}

fn vectorize(a: VectorizeArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Vectorize, |c| {
            c.vectorize.word2vec = training(c.vectorize.word2vec.clone(), &a);
            c.vectorize.doc2vec = training(c.vectorize.doc2vec.clone(), &a);
            Ok(())
        });
    }
    let input = required(&a.input, "--in")?;
    let out = required(&a.out, "--out")?;
    let corpus: Vec<TokenDoc> = read_jsonl(&in_file(input, "corpus.jsonl"))?;
    fs::create_dir_all(out)?;
    if a.model != ModelChoice::Doc2vec {
        let m = train_word2vec(&corpus, &training(TrainingConfig::default(), &a))?;
        save_model(&m, &out.join("word2vec.bin"))?;
        let mut vectors = ndarray::Array2::zeros((corpus.len(), m.dim()));
        for (i, d) in corpus.iter().enumerate() {
            let v = doc_vector_from_words(&m, d, WordWeighting::Tfidf);
            vectors.row_mut(i).assign(&ndarray::ArrayView1::from(&v.vector));
        }
        DocVectors {
            doc_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
            vectors,
        }
        .save(&out.join("doc_vectors_word2vec.bin"))?;
    }
    if a.model != ModelChoice::Word2vec {
        let m = train_doc2vec(&corpus, &training(TrainingConfig::doc2vec(), &a))?;
        save_model(&m, &out.join("doc2vec.bin"))?;
        DocVectors {
            doc_ids: m.doc_ids.clone(),
            vectors: m.doc_vectors.clone().expect("doc2vec has document vectors"),
        }
        .save(&out.join("doc_vectors_doc2vec.bin"))?;
    }
    println!("models written to {}", out.display());
    Ok(())
}

fn parse_algo(name: &str) -> Result<Algorithm> {
    match Algorithm::parse(name) {
        Some(a) => Ok(a),
        None => usage(format!(
            "unknown algorithm {name:?}; expected one of {}",
            Algorithm::ALL.map(|a| a.name()).join(", ")
        )),
    }
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let algo = a.algo.as_deref().map(parse_algo).transpose()?;
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Cluster, |c| {
            if let Some(alg) = algo {
                c.cluster.algorithms = vec![alg];
                c.cluster.primary = alg;
            }
            if let Some(k) = a.k {
                c.cluster.k = k;
            }
            if let Some(s) = a.seed {
                c.cluster.seed = s;
            }
            Ok(())
        });
    }
    let algo = match algo {
        Some(x) => x,
        None => return usage("--algo is required without --config"),
    };
    let input = required(&a.input, "--in")?;
    let out = required(&a.out, "--out")?;
    let settings = ClusterSettings {
        k: a.k.unwrap_or(ClusterSettings::default().k),
        seed: a.seed.unwrap_or(0),
        algorithms: vec![algo],
        primary: algo,
        ..ClusterSettings::default()
    };
    let corpus: Vec<TokenDoc> = read_jsonl(&in_file(input, "corpus.jsonl"))?;
    let vec_settings = VectorizeSettings::default();
    let emb = match (&a.vectors, algo) {
        (Some(p), Algorithm::Word2vecKmeans) => Embeddings {
            word2vec: Some(DocVectors::load(p)?),
            doc2vec: None,
        },
        (Some(p), Algorithm::Doc2vecKmeans) => Embeddings {
            word2vec: None,
            doc2vec: Some(DocVectors::load(p)?),
        },
        _ => train_embeddings(&corpus, &vec_settings, &[algo])?,
    };
    let run = run_algorithm(algo, &corpus, &settings, vec_settings.max_df, &emb)?;
    run.assignment.write_csv(out)?;
    println!("cluster sizes: {:?}", run.assignment.cluster_sizes());
    Ok(())
}

#[derive(Deserialize)]
struct LabelRow {
    doc_id: String,
    label: String,
}

fn read_named_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = BTreeMap::new();
    for row in r.deserialize::<LabelRow>() {
        let row = row?;
        out.insert(row.doc_id, row.label);
    }
    Ok(out)
}

fn eval(a: EvalArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Eval, |c| {
            if let Some(m) = a.nmi_average {
                c.eval.nmi_average = m.into();
            }
            if a.true_labels.is_some() {
                c.eval.reference_labels = a.true_labels.clone();
            }
            Ok(())
        });
    }
    let truth = index_labels(&read_named_labels(required(&a.true_labels, "--true")?)?);
    let pred = index_labels(&read_named_labels(required(&a.pred, "--pred")?)?);
    let out = required(&a.out, "--out")?;
    let missing: Vec<&str> = pred.keys().filter(|d| !truth.contains_key(*d)).map(String::as_str).collect();
    if !missing.is_empty() {
        bail!(PipelineError::MissingReference(missing.iter().map(|s| s.to_string()).collect()));
    }
    let t: Vec<usize> = pred.keys().map(|d| truth[d]).collect();
    let p: Vec<usize> = pred.values().copied().collect();
    let report = evaluate_with(&t, &p, a.nmi_average.map_or(AverageMethod::Arithmetic, Into::into))?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    fs::write(out, json)?;
    println!(
        "RS {:.3}  ARS {:.3}  MI {:.3}  NMI {:.3}  CA {:.3}  PS {:.3}",
        report.rs, report.ars, report.mi, report.nmi, report.ca, report.ps
    );
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Report, |c| {
            if a.labels.is_some() {
                c.report.labels = a.labels.clone();
            }
            if let Some(n) = a.top_n {
                c.report.top_n = n;
            }
            if a.no_projection {
                c.report.projection = false;
            }
            Ok(())
        });
    }
    let assignment = ClusterAssignment::read_csv(required(&a.assignment, "--assignment")?, "report")?;
    let dv = DocVectors::load(required(&a.vectors, "--vectors")?)?;
    let records = load_records(required(&a.records, "--records")?)?;
    let out = required(&a.out, "--out")?;
    let by_id: BTreeMap<&str, usize> = dv.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mut vectors = ndarray::Array2::<f64>::zeros((assignment.len(), dv.vectors.ncols()));
    for (i, d) in assignment.doc_ids.iter().enumerate() {
        let Some(&row) = by_id.get(d.as_str()) else {
            bail!("document {d} has no vector in {}", a.vectors.as_ref().unwrap().display());
        };
        vectors.row_mut(i).assign(&dv.vectors.row(row).mapv(f64::from));
    }
    let labels = match &a.labels {
        Some(p) => read_labels(p)?,
        None => default_labels(assignment.k),
    };
    let mut assignment = assignment;
    assignment.k = assignment.k.max(labels.labels.keys().max().map_or(0, |m| m + 1));
    let merged = apply_merges(&assignment, &labels)?;
    let trends = topic_trends(&merged, &year_index(&records))?;
    let mut summaries = representatives(&vectors, &merged, a.top_n.unwrap_or(corpusminer::insight::DEFAULT_TOP_N))?;
    annotate(&mut summaries, &labels, &trends, &records);
    let projection = if a.no_projection {
        None
    } else {
        Some(tsne(&vectors, &merged.doc_ids, &TsneConfig::default())?)
    };
    let manifest = emit_reports(
        &ReportInput {
            summaries: &summaries,
            trends: &trends,
            projection: projection.as_ref(),
            point_topics: &merged.labels,
        },
        out,
    )?;
    println!("wrote {} report files to {}", manifest.files.len() + 1, out.display());
    Ok(())
}

fn entities(a: EntityArgs) -> Result<()> {
    if a.pipeline.config.is_some() {
        return configured(&a.pipeline, StageName::Entities, |c| {
            let e = &mut c.entities;
            if a.first_names.is_some() {
                e.first_names = a.first_names.clone();
            }
            if a.journal_aliases.is_some() {
                e.journal_aliases = a.journal_aliases.clone();
            }
            if a.exclude_names.is_some() {
                e.exclude_names = a.exclude_names.clone();
            }
            if let Some(n) = a.top_authors {
                e.top_authors = n;
            }
            if let Some(m) = a.min_occurrences {
                e.min_journal_occurrences = m;
            }
            Ok(())
        });
    }
    let texts_dir = required(&a.texts, "--texts")?;
    let out = required(&a.out, "--out")?;
    let res = EntityResources::from_files(
        a.first_names.as_deref(),
        a.journal_aliases.as_deref(),
        a.exclude_names.as_deref(),
    )?;
    let texts: Vec<String> = match &a.records {
        Some(r) => load_records(r)?
            .iter()
            .filter_map(|rec| fs::read_to_string(texts_dir.join(format!("{}.txt", rec.id))).ok())
            .collect(),
        None => read_txt_dir(texts_dir)?.into_iter().map(|(_, t)| t).collect(),
    };
    let (persons, journals) = mine_entities(&texts, &res)?;
    fs::create_dir_all(out)?;
    let defaults = corpusminer::pipeline::EntitySettings::default();
    write_ranking(
        &out.join("authors.csv"),
        &rank_entities(&persons, 0, a.top_authors.unwrap_or(defaults.top_authors)),
    )?;
    write_ranking(
        &out.join("journals.csv"),
        &rank_entities(&journals, a.min_occurrences.unwrap_or(defaults.min_journal_occurrences), usize::MAX),
    )?;
    println!("rankings written to {}", out.display());
    Ok(())
}
