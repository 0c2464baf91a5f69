use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use corpusminer::harvest::load_records;
use corpusminer::pipeline::{list_files, run_stage, PipelineConfig, PipelineError, StageManifest, StageName};
use corpusminer::sample::{generate_sample, DEFAULT_SAMPLE_DOCS, DEFAULT_SAMPLE_SEED};

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn sample_copy() -> (tempfile::TempDir, PipelineConfig) {
    let dir = tempfile::tempdir().unwrap();
    let from = sample_dir();
    fs::copy(from.join("records.ndjson"), dir.path().join("records.ndjson")).unwrap();
    fs::copy(from.join("pipeline.toml"), dir.path().join("pipeline.toml")).unwrap();
    fs::create_dir(dir.path().join("texts")).unwrap();
    for e in fs::read_dir(from.join("texts")).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), dir.path().join("texts").join(e.file_name())).unwrap();
    }
    let cfg = PipelineConfig::load(&dir.path().join("pipeline.toml")).unwrap();
    (dir, cfg)
}

#[test]
fn bundled_sample_matches_generator() {
    let sample = generate_sample(DEFAULT_SAMPLE_DOCS, DEFAULT_SAMPLE_SEED);
    let records = load_records(&sample_dir().join("records.ndjson")).unwrap();
    assert_eq!(records, sample.records);
    for (id, text) in &sample.texts {
        let on_disk = fs::read_to_string(sample_dir().join("texts").join(format!("{id}.txt"))).unwrap();
        assert_eq!(&on_disk, text, "text of {id}");
    }
    assert_eq!(fs::read_dir(sample_dir().join("texts")).unwrap().count(), sample.texts.len());
}

#[test]
fn unchanged_stage_is_skipped_and_config_change_reruns() {
    let (dir, mut cfg) = sample_copy();
    assert!(!run_stage(StageName::Harvest, &cfg, false).unwrap().skipped);
    assert!(!run_stage(StageName::Prep, &cfg, false).unwrap().skipped);
    assert!(run_stage(StageName::Prep, &cfg, false).unwrap().skipped);
    assert!(!run_stage(StageName::Prep, &cfg, true).unwrap().skipped);

    cfg.prep.min_count += 1;
    assert!(!run_stage(StageName::Prep, &cfg, false).unwrap().skipped);

    // an edited text changes the prep inputs
    let first = fs::read_dir(dir.path().join("texts")).unwrap().next().unwrap().unwrap();
    let text = first.path();
    fs::write(&text, "An edited body about volatility.").unwrap();
    assert!(!run_stage(StageName::Prep, &cfg, false).unwrap().skipped);

    // a damaged output forces a rerun too
    fs::write(cfg.work_dir().join("prep/summary.json"), "{}").unwrap();
    assert!(!run_stage(StageName::Prep, &cfg, false).unwrap().skipped);
}

#[test]
fn missing_upstream_is_reported() {
    let (_dir, cfg) = sample_copy();
    match run_stage(StageName::Cluster, &cfg, false) {
        Err(e @ PipelineError::MissingUpstream { .. }) => {
            assert_eq!(e.exit_code(), 3);
            assert!(e.to_string().contains("requires stage vectorize"), "{e}");
        }
        other => panic!("expected missing upstream, got {other:?}"),
    }
}

#[test]
fn every_output_listed_in_exactly_one_manifest() {
    let (_dir, cfg) = sample_copy();
    for stage in StageName::ALL {
        run_stage(stage, &cfg, false).unwrap();
    }
    let work = cfg.work_dir();
    let mut owners: BTreeMap<String, Vec<StageName>> = BTreeMap::new();
    for stage in StageName::ALL {
        let m = StageManifest::load(&work, stage).unwrap().expect("manifest written");
        for f in m.outputs {
            owners.entry(f.name).or_default().push(stage);
        }
    }
    for path in list_files(&work).unwrap() {
        let rel = path.strip_prefix(&work).unwrap().to_string_lossy().replace('\\', "/");
        if rel.starts_with("manifests/") {
            continue;
        }
        let who = owners.get(&rel).cloned().unwrap_or_default();
        assert_eq!(who.len(), 1, "{rel} listed by {who:?}");
    }
    let comparison = fs::read_to_string(work.join("eval/comparison.csv")).unwrap();
    assert_eq!(comparison.lines().next(), Some("algorithm,RS,ARS,MI,NMI,CA,PS"));
    assert_eq!(comparison.lines().count(), 1 + cfg.cluster.algorithms.len());
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[cluster]\nk = 0\n\n[phrases]\npasses = 0\n").unwrap();
    match PipelineConfig::load(&path) {
        Err(e @ PipelineError::Config(_)) => {
            assert_eq!(e.exit_code(), 2);
            let PipelineError::Config(list) = &e else { unreachable!() };
            assert!(list.len() >= 2, "{list:?}");
        }
        other => panic!("expected config error, got {other:?}"),
    }
}
