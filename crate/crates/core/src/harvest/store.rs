use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{DocumentRecord, HarvestError};

/// Reads a newline-delimited JSON store; a missing file is an empty store.
pub fn load_records(path: &Path) -> Result<Vec<DocumentRecord>, HarvestError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| HarvestError::StoreLine { line: i + 1, source })?);
    }
    Ok(out)
}

/// Upserts `records` by id and rewrites the store sorted by id.
///
/// Returns the number of distinct ids written by this call. Within one call a
/// repeated id keeps the later record.
pub fn store_records(records: &[DocumentRecord], path: &Path) -> Result<usize, HarvestError> {
    if records.is_empty() {
        return Ok(0);
    }
    let mut merged: BTreeMap<String, DocumentRecord> =
        load_records(path)?.into_iter().map(|r| (r.id.clone(), r)).collect();
    let mut seen = BTreeSet::new();
    for r in records {
        if r.id.is_empty() {
            return Err(HarvestError::InvalidQuery("record with empty id".into()));
        }
        if !seen.insert(r.id.as_str()) {
            log::warn!("duplicate id {} in one store call; keeping the later record", r.id);
        }
        merged.insert(r.id.clone(), r.clone());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("ndjson.tmp");
    {
        let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
        for r in merged.values() {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(seen.len())
}

pub fn pdf_urls(records: &[DocumentRecord]) -> Vec<String> {
    records.iter().map(|r| format!("https://arxiv.org/pdf/{}", r.id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harvest::CategoryCode;

    fn rec(id: &str, title: &str) -> DocumentRecord {
        let cat = CategoryCode::parse("q-fin.PR").unwrap();
        DocumentRecord {
            id: id.into(),
            title: title.into(),
            authors: vec!["A B".into()],
            all_categories: vec![cat.clone()],
            reference_category: Some(cat),
            year: 2019,
            abstract_text: "text".into(),
            doi: None,
            updated: None,
        }
    }

    #[test]
    fn idempotent_upsert() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.ndjson");
        let recs = vec![rec("c", "3"), rec("a", "1"), rec("b", "2")];
        assert_eq!(store_records(&recs, &path).unwrap(), 3);
        let first = fs::read(&path).unwrap();
        assert_eq!(store_records(&recs, &path).unwrap(), 3);
        assert_eq!(fs::read(&path).unwrap(), first);
        let loaded = load_records(&path).unwrap();
        assert_eq!(loaded.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert_eq!(loaded[0], recs[1]);
    }

    #[test]
    fn empty_call_leaves_store_alone() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.ndjson");
        assert_eq!(store_records(&[], &path).unwrap(), 0);
        assert!(!path.exists());
    }

    #[test]
    fn duplicate_ids_last_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.ndjson");
        assert_eq!(store_records(&[rec("x", "first"), rec("x", "second")], &path).unwrap(), 1);
        let loaded = load_records(&path).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].title, "second");
    }

    #[test]
    fn bad_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.ndjson");
        fs::write(&path, "{}\n").unwrap();
        assert!(matches!(load_records(&path), Err(HarvestError::StoreLine { line: 1, .. })));
    }

    #[test]
    fn urls() {
        assert_eq!(pdf_urls(&[rec("2005.06390", "t")]), vec!["https://arxiv.org/pdf/2005.06390"]);
    }
}
