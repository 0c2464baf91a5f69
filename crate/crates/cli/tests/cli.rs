use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn corpusminer(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corpusminer"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sample_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let from = sample_dir();
    fs::copy(from.join("records.ndjson"), dir.path().join("records.ndjson")).unwrap();
    fs::copy(from.join("pipeline.toml"), dir.path().join("pipeline.toml")).unwrap();
    fs::create_dir(dir.path().join("texts")).unwrap();
    for e in fs::read_dir(from.join("texts")).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), dir.path().join("texts").join(e.file_name())).unwrap();
    }
    dir
}

#[test]
fn second_prep_run_is_skipped() {
    let dir = sample_copy();
    let o = corpusminer(&["run", "harvest", "--config", "pipeline.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let first = corpusminer(&["prep", "--config", "pipeline.toml"], dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stdout(&first).contains("ran in"), "{}", stdout(&first));
    let second = corpusminer(&["prep", "--config", "pipeline.toml"], dir.path());
    assert!(second.status.success());
    assert!(stdout(&second).contains("skipped (up to date)"), "{}", stdout(&second));
}

#[test]
fn cluster_before_vectorize_exits_3() {
    let dir = sample_copy();
    let o = corpusminer(&["cluster", "--config", "pipeline.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("requires stage vectorize"), "{}", stderr(&o));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[cluster]\nk = 0\n").unwrap();
    let o = corpusminer(&["run", "all", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k"), "{}", stderr(&o));

    fs::write(dir.path().join("typo.toml"), "[clusterr]\nk = 3\n").unwrap();
    let o = corpusminer(&["run", "all", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_direct_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = corpusminer(&["eval", "--pred", "p.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn eval_direct_mode_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("true.csv"), "doc_id,label\na,x\nb,x\nc,y\nd,y\n").unwrap();
    fs::write(dir.path().join("pred.csv"), "doc_id,label\na,1\nb,1\nc,0\nd,0\n").unwrap();
    let o = corpusminer(
        &["eval", "--true", "true.csv", "--pred", "pred.csv", "--out", "m.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(m["ca"], 1.0);
    assert_eq!(m["ars"], 1.0);

    fs::write(dir.path().join("pred.csv"), "doc_id,label\na,1\nzz,0\n").unwrap();
    let o = corpusminer(
        &["eval", "--true", "true.csv", "--pred", "pred.csv", "--out", "m.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("zz"), "{}", stderr(&o));
}

#[test]
fn sample_command_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = corpusminer(&["sample", "--out", out, "--docs", "20", "--seed", "3"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/records.ndjson")).unwrap();
    let b = fs::read(dir.path().join("b/records.ndjson")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 20);
}
