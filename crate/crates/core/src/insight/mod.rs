//! Cluster interpretation: representative documents, yearly trends,
//! a 2-D t-SNE projection, topic labels and report files.

mod labels;
mod report;
mod tsne;

pub use labels::{apply_merges, default_labels, read_labels, write_labels, TopicLabels};
pub use report::{emit_reports, render_projection_svg, render_trends_svg, FileEntry, FileManifest, ReportInput};
pub use tsne::{tsne, Projection2D, TsneConfig};

use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::harvest::DocumentRecord;

pub const DEFAULT_TOP_N: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum InsightError {
    #[error("{vectors} vector rows but {labels} assigned documents")]
    RowMismatch { vectors: usize, labels: usize },
    #[error("no year known for documents: {}", .0.join(", "))]
    UnresolvedDocs(Vec<String>),
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("labels file line {line}: {message}")]
    Labels { line: usize, message: String },
    #[error("report io: {0}")]
    Io(#[from] std::io::Error),
    #[error("report json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub label: String,
    pub size: usize,
    /// Members nearest the centroid first.
    pub representative_doc_ids: Vec<String>,
    pub representative_distances: Vec<f64>,
    #[serde(default)]
    pub representative_titles: Vec<String>,
    #[serde(default)]
    pub yearly_counts: BTreeMap<i32, usize>,
}

/// Ranks each cluster's members by Euclidean distance to the cluster mean.
pub fn representatives(
    vectors: &Array2<f64>,
    assignment: &ClusterAssignment,
    top_n: usize,
) -> Result<Vec<TopicSummary>, InsightError> {
    if vectors.nrows() != assignment.len() {
        return Err(InsightError::RowMismatch {
            vectors: vectors.nrows(),
            labels: assignment.len(),
        });
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); assignment.k];
    for (i, &l) in assignment.labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut out = Vec::with_capacity(assignment.k);
    for (topic, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            log::warn!("topic {topic} has no members");
        }
        let mut centroid = Array1::<f64>::zeros(vectors.ncols());
        for &r in rows {
            centroid += &vectors.row(r);
        }
        if !rows.is_empty() {
            centroid /= rows.len() as f64;
        }
        let mut ranked: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| {
                let d = (&vectors.row(r) - &centroid).mapv(|x| x * x).sum().sqrt();
                (d, r)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ranked.truncate(top_n);
        out.push(TopicSummary {
            topic_id: topic,
            label: format!("topic-{topic}"),
            size: rows.len(),
            representative_doc_ids: ranked.iter().map(|&(_, r)| assignment.doc_ids[r].clone()).collect(),
            representative_distances: ranked.iter().map(|&(d, _)| d).collect(),
            representative_titles: Vec::new(),
            yearly_counts: BTreeMap::new(),
        });
    }
    Ok(out)
}

/// Topic → year → number of documents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendTable {
    pub counts: BTreeMap<usize, BTreeMap<i32, usize>>,
}

impl TrendTable {
    pub fn total(&self) -> usize {
        self.counts.values().flat_map(|y| y.values()).sum()
    }

    pub fn topic_total(&self, topic: usize) -> usize {
        self.counts.get(&topic).map_or(0, |y| y.values().sum())
    }

    pub fn years(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.counts.values().flat_map(|y| y.keys().copied()).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }
}

pub fn year_index(records: &[DocumentRecord]) -> HashMap<String, i32> {
    records.iter().map(|r| (r.id.clone(), r.year)).collect()
}

pub fn topic_trends(assignment: &ClusterAssignment, years: &HashMap<String, i32>) -> Result<TrendTable, InsightError> {
    let mut table = TrendTable::default();
    let mut missing = Vec::new();
    for (doc, &label) in assignment.doc_ids.iter().zip(&assignment.labels) {
        match years.get(doc) {
            Some(&y) => *table.counts.entry(label).or_default().entry(y).or_insert(0) += 1,
            None => missing.push(doc.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(InsightError::UnresolvedDocs(missing));
    }
    Ok(table)
}

/// Copies labels, yearly counts and representative titles into the summaries.
pub fn annotate(
    summaries: &mut [TopicSummary],
    labels: &TopicLabels,
    trends: &TrendTable,
    records: &[DocumentRecord],
) {
    let titles: HashMap<&str, &str> = records.iter().map(|r| (r.id.as_str(), r.title.as_str())).collect();
    for s in summaries {
        s.label = labels.label(s.topic_id);
        s.yearly_counts = trends.counts.get(&s.topic_id).cloned().unwrap_or_default();
        s.representative_titles = s
            .representative_doc_ids
            .iter()
            .map(|id| titles.get(id.as_str()).copied().unwrap_or_default().to_string())
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(ids: &[&str], labels: &[usize], k: usize) -> ClusterAssignment {
        ClusterAssignment::new(ids.iter().map(|s| s.to_string()).collect(), labels.to_vec(), k, "t", None).unwrap()
    }

    #[test]
    fn single_member_is_its_own_representative() {
        let v = ndarray::arr2(&[[1.0, 2.0]]);
        let s = representatives(&v, &assign(&["a"], &[0], 1), 20).unwrap();
        assert_eq!(s[0].representative_doc_ids, vec!["a"]);
        assert_eq!(s[0].representative_distances, vec![0.0]);
    }

    #[test]
    fn middle_of_collinear_points_first() {
        let v = ndarray::arr2(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        let s = representatives(&v, &assign(&["a", "b", "c"], &[0, 0, 0], 1), 20).unwrap();
        assert_eq!(s[0].representative_doc_ids[0], "b");
        assert_eq!(s[0].representative_distances[0], 0.0);
    }

    #[test]
    fn truncation_and_empty_clusters() {
        let v = Array2::from_shape_fn((12, 3), |(i, j)| (i * 3 + j) as f64);
        let ids: Vec<String> = (0..12).map(|i| format!("d{i}")).collect();
        let a = ClusterAssignment::new(ids, vec![0; 12], 2, "t", None).unwrap();
        let s = representatives(&v, &a, 20).unwrap();
        assert_eq!(s[0].representative_doc_ids.len(), 12);
        assert!(s[1].representative_doc_ids.is_empty());
        let d = &s[0].representative_distances;
        assert!(d.iter().all(|&x| x >= d[0]));
        assert!(matches!(
            representatives(&v.slice(ndarray::s![..5, ..]).to_owned(), &a, 20),
            Err(InsightError::RowMismatch { vectors: 5, labels: 12 })
        ));
    }

    #[test]
    fn trends_count_years() {
        let years: HashMap<String, i32> = [("a", 2020), ("b", 2021)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let t = topic_trends(&assign(&["a", "b"], &[0, 0], 1), &years).unwrap();
        assert_eq!(t.counts[&0], BTreeMap::from([(2020, 1), (2021, 1)]));
        assert_eq!(t.total(), 2);
        let empty = topic_trends(&assign(&[], &[], 3), &years).unwrap();
        assert!(empty.counts.is_empty());
        match topic_trends(&assign(&["a", "zz", "yy"], &[0, 0, 0], 1), &years) {
            Err(InsightError::UnresolvedDocs(d)) => assert_eq!(d, vec!["zz", "yy"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ten_doc_fixture_tally() {
        let ids = ["d0", "d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9"];
        let labels = [0, 1, 2, 0, 1, 2, 0, 0, 1, 2];
        let yrs = [2018, 2018, 2019, 2019, 2019, 2020, 2020, 2018, 2020, 2020];
        let years: HashMap<String, i32> = ids.iter().zip(yrs).map(|(i, y)| (i.to_string(), y)).collect();
        let t = topic_trends(&assign(&ids, &labels, 3), &years).unwrap();
        assert_eq!(t.counts[&0], BTreeMap::from([(2018, 2), (2019, 1), (2020, 1)]));
        assert_eq!(t.counts[&1], BTreeMap::from([(2018, 1), (2019, 1), (2020, 1)]));
        assert_eq!(t.counts[&2], BTreeMap::from([(2019, 1), (2020, 2)]));
        assert_eq!(t.years(), vec![2018, 2019, 2020]);
    }
}
