use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::compare::{compare_assignments, doc2vec_doc_vectors, index_labels, run_algorithm, word2vec_doc_vectors, Embeddings};
use super::config::{Algorithm, HarvestSource, PipelineConfig};
use super::manifest::{list_files, sha256_bytes, sha256_file};
use super::{read_jsonl, write_jsonl, PipelineError, StageName};
use crate::cluster::ClusterAssignment;
use crate::entities::{mine_entities, rank_entities, write_ranking, EntityResources};
use crate::harvest::{harvest_all, load_records, pdf_urls, store_records, ApiSource, DirSource, DocumentRecord, API_URL};
use crate::insight::{
    annotate, apply_merges, default_labels, emit_reports, read_labels, representatives, topic_trends, tsne,
    write_labels, year_index, ReportInput,
};
use crate::phrasemine::{mine_phrases, JOINER};
use crate::textprep::{
    clean_corpus, detect_english, flesch_score, frequency_table, lemmatize, tokenize, StopwordConfig, TokenDoc,
};
use crate::vectorize::{save_model, sidecar_path, train_doc2vec, train_word2vec, DocVectors};

const RECORDS: &str = "harvest/records.ndjson";
const PDF_URLS: &str = "harvest/pdf_urls.txt";
const CLEANED: &str = "prep/cleaned.jsonl";
const PHRASED: &str = "phrases/corpus.jsonl";
const W2V_DOCS: &str = "vectorize/doc_vectors_word2vec.bin";
const D2V_DOCS: &str = "vectorize/doc_vectors_doc2vec.bin";
const PRIMARY_VECTORS: &str = "cluster/primary_vectors.bin";

fn assignment_file(a: Algorithm) -> String {
    format!("cluster/{}.csv", a.name())
}

/// Files outside the work directory that a stage reads, keyed by label.
pub(super) fn external_inputs(
    stage: StageName,
    cfg: &PipelineConfig,
    work: &Path,
) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    let add_opt = |label: &str, p: &Option<PathBuf>, out: &mut BTreeMap<String, String>| {
        if let Some(p) = p {
            out.insert(label.to_string(), sha256_file(&cfg.resolve(p))?);
        }
        Ok::<_, PipelineError>(())
    };
    match stage {
        StageName::Harvest => match cfg.harvest.source {
            HarvestSource::Local => {
                out.insert("records".into(), sha256_file(&cfg.records_path())?);
            }
            HarvestSource::Dir => {
                let dir = cfg.resolve(cfg.harvest.fixture_dir.as_ref().expect("validated"));
                for f in list_files(&dir)? {
                    let name = f.strip_prefix(&dir).unwrap_or(&f).to_string_lossy().to_string();
                    out.insert(format!("fixture:{name}"), sha256_file(&f)?);
                }
            }
            HarvestSource::Api => {}
        },
        StageName::Prep => {
            out.insert("texts".into(), texts_digest(cfg, work)?);
            add_opt("english_stopwords", &cfg.prep.english_stopwords, &mut out)?;
            add_opt("domain_stopwords", &cfg.prep.domain_stopwords, &mut out)?;
        }
        StageName::Eval => add_opt("reference_labels", &cfg.eval.reference_labels, &mut out)?,
        StageName::Report => add_opt("labels", &cfg.report.labels, &mut out)?,
        StageName::Entities => {
            out.insert("texts".into(), texts_digest(cfg, work)?);
            add_opt("first_names", &cfg.entities.first_names, &mut out)?;
            add_opt("journal_aliases", &cfg.entities.journal_aliases, &mut out)?;
            add_opt("exclude_names", &cfg.entities.exclude_names, &mut out)?;
        }
        _ => {}
    }
    Ok(out)
}

/// One hash over the text file of every harvested record.
fn texts_digest(cfg: &PipelineConfig, work: &Path) -> Result<String, PipelineError> {
    let dir = cfg.texts_dir();
    let mut acc = String::new();
    for r in load_records(&work.join(RECORDS))? {
        let p = dir.join(format!("{}.txt", r.id));
        let h = if p.is_file() { sha256_file(&p)? } else { "missing".into() };
        acc.push_str(&format!("{}\t{h}\n", r.id));
    }
    Ok(sha256_bytes(acc.as_bytes()))
}

/// The config sections a stage depends on.
pub(super) fn config_snapshot(stage: StageName, cfg: &PipelineConfig) -> Result<serde_json::Value, PipelineError> {
    Ok(match stage {
        StageName::Harvest => json!({ "harvest": v(&cfg.harvest)? }),
        StageName::Prep => json!({ "prep": v(&cfg.prep)? }),
        StageName::Phrases => json!({ "phrases": v(&cfg.phrases)? }),
        StageName::Vectorize => json!({
            "vectorize": v(&cfg.vectorize)?,
            "algorithms": v(&cfg.cluster.algorithms)?,
        }),
        StageName::Cluster => json!({
            "cluster": v(&cfg.cluster)?,
            "max_df": cfg.vectorize.max_df,
        }),
        StageName::Eval => json!({
            "eval": v(&cfg.eval)?,
            "algorithms": v(&cfg.cluster.algorithms)?,
        }),
        StageName::Report => json!({
            "report": v(&cfg.report)?,
            "primary": v(&cfg.cluster.primary)?,
        }),
        StageName::Entities => json!({ "entities": v(&cfg.entities)? }),
    })
}

fn v<T: Serialize>(x: &T) -> Result<serde_json::Value, PipelineError> {
    Ok(serde_json::to_value(x)?)
}

/// Runs the stage body and returns the files it wrote.
pub(super) fn execute(stage: StageName, cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = work.join(stage.name());
    let keep_store = stage == StageName::Harvest && cfg.harvest.source != HarvestSource::Local;
    if dir.exists() && !keep_store {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    match stage {
        StageName::Harvest => harvest(cfg, work),
        StageName::Prep => prep(cfg, work),
        StageName::Phrases => phrases(cfg, work),
        StageName::Vectorize => vectorize(cfg, work),
        StageName::Cluster => cluster(cfg, work),
        StageName::Eval => eval(cfg, work),
        StageName::Report => report(cfg, work),
        StageName::Entities => entities(cfg, work),
    }
}

fn harvest(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let store = work.join(RECORDS);
    let records = match cfg.harvest.source {
        HarvestSource::Local => {
            let r = load_records(&cfg.records_path())?;
            if r.is_empty() {
                return Err(PipelineError::Runtime(format!(
                    "no records in {}",
                    cfg.records_path().display()
                )));
            }
            r
        }
        HarvestSource::Dir => {
            let dir = cfg.resolve(cfg.harvest.fixture_dir.as_ref().expect("validated"));
            harvest_all(&mut DirSource::new(dir), &cfg.harvest.query()?)?
        }
        HarvestSource::Api => {
            let delay = Duration::from_secs_f64(cfg.harvest.request_delay_secs);
            harvest_all(&mut ApiSource::with_settings(API_URL, delay, 3), &cfg.harvest.query()?)?
        }
    };
    let n = store_records(&records, &store)?;
    log::info!("harvest: {n} records stored");
    let all = load_records(&store)?;
    let mut urls = pdf_urls(&all).join("\n");
    urls.push('\n');
    fs::write(work.join(PDF_URLS), urls)?;
    Ok(vec![store, work.join(PDF_URLS)])
}

/// Records in store order paired with their text; records without a text file are listed separately.
fn load_texts(cfg: &PipelineConfig, work: &Path) -> Result<(Vec<DocumentRecord>, Vec<(String, String)>, Vec<String>), PipelineError> {
    let records = load_records(&work.join(RECORDS))?;
    let dir = cfg.texts_dir();
    let mut texts = Vec::with_capacity(records.len());
    let mut missing = Vec::new();
    for r in &records {
        match fs::read_to_string(dir.join(format!("{}.txt", r.id))) {
            Ok(t) => texts.push((r.id.clone(), t)),
            Err(e) if e.kind() == ErrorKind::NotFound => missing.push(r.id.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    if !missing.is_empty() {
        log::warn!("{} records have no text file in {}", missing.len(), dir.display());
    }
    if texts.is_empty() {
        return Err(PipelineError::Runtime(format!("no document texts found in {}", dir.display())));
    }
    Ok((records, texts, missing))
}

#[derive(Serialize, Deserialize)]
struct LanguageRow {
    doc_id: String,
    english: bool,
    low_confidence: bool,
    best: String,
    similarity: f64,
}

#[derive(Serialize)]
struct FrequencyRow<'a> {
    token: &'a str,
    count: u64,
    percent: f64,
}

fn median(mut v: Vec<usize>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

fn prep(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let (_, texts, missing) = load_texts(cfg, work)?;
    let raw: Vec<TokenDoc> = texts.par_iter().map(|(id, t)| tokenize(id, t)).collect();
    let readability: Vec<_> = texts.par_iter().map(|(id, t)| flesch_score(id, t)).collect();
    let languages: Vec<_> = raw.par_iter().map(detect_english).collect();
    let lemmatized: Vec<TokenDoc> = raw.par_iter().map(lemmatize).collect::<Result<_, _>>()?;

    let non_english: Vec<String> = raw
        .iter()
        .zip(&languages)
        .filter(|(_, l)| !l.english)
        .map(|(d, _)| d.doc_id.clone())
        .collect();
    let kept: Vec<TokenDoc> = if cfg.prep.drop_non_english {
        lemmatized.iter().zip(&languages).filter(|(_, l)| l.english).map(|(d, _)| d.clone()).collect()
    } else {
        lemmatized.clone()
    };
    let stop = StopwordConfig::from_files(
        cfg.prep.english_stopwords.as_ref().map(|p| cfg.resolve(p)).as_deref(),
        cfg.prep.domain_stopwords.as_ref().map(|p| cfg.resolve(p)).as_deref(),
    )?;
    let cleaned = clean_corpus(&kept, &stop, cfg.prep.min_count)?;

    let p = |name: &str| work.join("prep").join(name);
    write_jsonl(&p("raw.jsonl"), &raw)?;
    write_jsonl(&p("lemmatized.jsonl"), &kept)?;
    write_jsonl(&p("cleaned.jsonl"), &cleaned)?;
    write_csv(&p("readability.csv"), &readability)?;
    write_csv(
        &p("language.csv"),
        raw.iter().zip(&languages).map(|(d, l)| LanguageRow {
            doc_id: d.doc_id.clone(),
            english: l.english,
            low_confidence: l.low_confidence,
            best: l.ranking.first().map(|(lang, _)| format!("{lang:?}").to_lowercase()).unwrap_or_default(),
            similarity: l.ranking.first().map_or(0.0, |(_, s)| *s),
        }),
    )?;
    let freq = frequency_table(&cleaned)?;
    write_csv(
        &p("frequencies.csv"),
        freq.iter().map(|f| FrequencyRow {
            token: &f.token,
            count: f.count,
            percent: f.percent(),
        }),
    )?;
    let flesch: Vec<f64> = readability.iter().map(|r| r.flesch).collect();
    write_json(
        &p("summary.json"),
        &json!({
            "documents": raw.len(),
            "missing_texts": missing,
            "non_english": non_english,
            "kept": cleaned.len(),
            "mean_flesch": flesch.iter().sum::<f64>() / flesch.len() as f64,
            "median_tokens": {
                "raw": median(raw.iter().map(TokenDoc::len).collect()),
                "lemmatized": median(kept.iter().map(TokenDoc::len).collect()),
                "cleaned": median(cleaned.iter().map(TokenDoc::len).collect()),
            },
        }),
    )?;
    list_files(&work.join("prep"))
}

#[derive(Serialize)]
struct PhraseRow<'a> {
    phrase: &'a str,
    count: u64,
}

fn phrases(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let cleaned: Vec<TokenDoc> = read_jsonl(&work.join(CLEANED))?;
    let s = &cfg.phrases;
    let (corpus, models) = mine_phrases(&cleaned, s.passes, s.min_count, s.threshold)?;
    let dir = work.join("phrases");
    for (i, m) in models.iter().enumerate() {
        m.save(&dir.join(format!("model_{}.json", i + 1)))?;
    }
    write_jsonl(&work.join(PHRASED), &corpus)?;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for t in corpus.iter().flat_map(|d| &d.tokens).filter(|t| t.contains(JOINER)) {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    write_csv(
        &dir.join("phrases.csv"),
        ranked.iter().map(|&(phrase, count)| PhraseRow { phrase, count }),
    )?;
    list_files(&dir)
}

fn vectorize(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let corpus: Vec<TokenDoc> = read_jsonl(&work.join(PHRASED))?;
    let s = &cfg.vectorize;
    let dir = work.join("vectorize");
    if cfg.cluster.algorithms.contains(&Algorithm::Word2vecKmeans) {
        let m = train_word2vec(&corpus, &s.word2vec)?;
        save_model(&m, &dir.join("word2vec.bin"))?;
        word2vec_doc_vectors(&m, &corpus, s.doc_weighting).save(&work.join(W2V_DOCS))?;
    }
    if cfg.cluster.algorithms.contains(&Algorithm::Doc2vecKmeans) {
        let m = train_doc2vec(&corpus, &s.doc2vec)?;
        save_model(&m, &dir.join("doc2vec.bin"))?;
        doc2vec_doc_vectors(&m).save(&work.join(D2V_DOCS))?;
    }
    list_files(&dir)
}

fn load_vectors(path: &Path) -> Result<Option<DocVectors>, PipelineError> {
    if path.is_file() && sidecar_path(path).is_file() {
        Ok(Some(DocVectors::load(path)?))
    } else {
        Ok(None)
    }
}

fn cluster(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let corpus: Vec<TokenDoc> = read_jsonl(&work.join(PHRASED))?;
    let emb = Embeddings {
        word2vec: load_vectors(&work.join(W2V_DOCS))?,
        doc2vec: load_vectors(&work.join(D2V_DOCS))?,
    };
    let c = &cfg.cluster;
    let mut sizes = BTreeMap::new();
    for &alg in &c.algorithms {
        log::info!("cluster: {}", alg.name());
        let run = run_algorithm(alg, &corpus, c, cfg.vectorize.max_df, &emb)?;
        run.assignment.write_csv(&work.join(assignment_file(alg)))?;
        if let Some(lda) = &run.lda {
            lda.save(&work.join("cluster"), "lda")?;
        }
        if alg == c.primary {
            DocVectors {
                doc_ids: run.assignment.doc_ids.clone(),
                vectors: run.vectors.mapv(|x| x as f32),
            }
            .save(&work.join(PRIMARY_VECTORS))?;
        }
        sizes.insert(alg.name(), run.assignment.cluster_sizes());
    }
    write_json(
        &work.join("cluster/summary.json"),
        &json!({ "k": c.k, "primary": c.primary.name(), "sizes": sizes }),
    )?;
    list_files(&work.join("cluster"))
}

fn reference_labels(cfg: &PipelineConfig, work: &Path) -> Result<BTreeMap<String, usize>, PipelineError> {
    let named: BTreeMap<String, String> = match &cfg.eval.reference_labels {
        Some(p) => {
            #[derive(Deserialize)]
            struct Row {
                doc_id: String,
                label: String,
            }
            let mut r = csv::Reader::from_path(cfg.resolve(p))?;
            r.deserialize::<Row>()
                .map(|row| row.map(|row| (row.doc_id, row.label)))
                .collect::<Result<_, _>>()?
        }
        None => load_records(&work.join(RECORDS))?
            .into_iter()
            .filter_map(|r| r.reference_category.map(|c| (r.id, c.as_str().to_string())))
            .collect(),
    };
    Ok(index_labels(&named))
}

fn eval(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let reference = reference_labels(cfg, work)?;
    let assignments = cfg
        .cluster
        .algorithms
        .iter()
        .map(|&a| Ok((a, ClusterAssignment::read_csv(&work.join(assignment_file(a)), a.name())?)))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let named: Vec<(&str, &ClusterAssignment)> = assignments.iter().map(|(a, x)| (a.title(), x)).collect();
    let table = compare_assignments(&named, &reference, cfg.eval.nmi_average)?;
    let dir = work.join("eval");
    fs::write(dir.join("comparison.csv"), table.to_csv())?;
    fs::write(dir.join("comparison.md"), table.to_markdown())?;
    write_json(&dir.join("comparison.json"), &table)?;
    list_files(&dir)
}

fn report(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let c = &cfg.cluster;
    let mut assignment = ClusterAssignment::read_csv(&work.join(assignment_file(c.primary)), c.primary.name())?;
    // some topics may be empty; keep the configured k
    assignment.k = assignment.k.max(c.k);
    let dv = DocVectors::load(&work.join(PRIMARY_VECTORS))?;
    if dv.doc_ids != assignment.doc_ids {
        return Err(PipelineError::Runtime("primary vectors and assignment list different documents".into()));
    }
    let vectors: Array2<f64> = dv.vectors.mapv(f64::from);
    let labels = match &cfg.report.labels {
        Some(p) => read_labels(&cfg.resolve(p))?,
        None => default_labels(assignment.k),
    };
    let merged = apply_merges(&assignment, &labels)?;
    let records = load_records(&work.join(RECORDS))?;
    let trends = topic_trends(&merged, &year_index(&records))?;
    let mut summaries = representatives(&vectors, &merged, cfg.report.top_n)?;
    annotate(&mut summaries, &labels, &trends, &records);
    let projection = if cfg.report.projection {
        Some(tsne(&vectors, &merged.doc_ids, &cfg.report.tsne)?)
    } else {
        None
    };
    let dir = work.join("report");
    emit_reports(
        &ReportInput {
            summaries: &summaries,
            trends: &trends,
            projection: projection.as_ref(),
            point_topics: &merged.labels,
        },
        &dir,
    )?;
    // editable template with the labels in effect
    write_labels(&labels, &dir.join("labels.csv"))?;
    list_files(&dir)
}

fn entities(cfg: &PipelineConfig, work: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let e = &cfg.entities;
    let res = EntityResources::from_files(
        e.first_names.as_ref().map(|p| cfg.resolve(p)).as_deref(),
        e.journal_aliases.as_ref().map(|p| cfg.resolve(p)).as_deref(),
        e.exclude_names.as_ref().map(|p| cfg.resolve(p)).as_deref(),
    )?;
    let (_, texts, _) = load_texts(cfg, work)?;
    let texts: Vec<String> = texts.into_iter().map(|(_, t)| t).collect();
    let (persons, journals) = mine_entities(&texts, &res)?;
    let dir = work.join("entities");
    write_ranking(&dir.join("authors.csv"), &rank_entities(&persons, 0, e.top_authors))?;
    write_ranking(
        &dir.join("journals.csv"),
        &rank_entities(&journals, e.min_journal_occurrences, usize::MAX),
    )?;
    list_files(&dir)
}
