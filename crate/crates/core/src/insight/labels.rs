use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InsightError;
use crate::cluster::ClusterAssignment;

/// Human labels per topic, with an optional merge target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicLabels {
    pub labels: BTreeMap<usize, String>,
    pub merge_into: BTreeMap<usize, usize>,
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    topic_id: usize,
    label: String,
    #[serde(default)]
    merge_into: Option<usize>,
}

impl TopicLabels {
    pub fn label(&self, topic: usize) -> String {
        self.labels.get(&topic).cloned().unwrap_or_else(|| format!("topic-{topic}"))
    }

    /// Final topic after following merge links.
    pub fn resolve(&self, topic: usize) -> Result<usize, InsightError> {
        let mut t = topic;
        for _ in 0..=self.merge_into.len() {
            match self.merge_into.get(&t) {
                Some(&next) if next != t => t = next,
                _ => return Ok(t),
            }
        }
        Err(InsightError::Labels {
            line: 0,
            message: format!("merge links starting at topic {topic} form a cycle"),
        })
    }
}

pub fn default_labels(k: usize) -> TopicLabels {
    TopicLabels {
        labels: (0..k).map(|t| (t, format!("topic-{t}"))).collect(),
        merge_into: BTreeMap::new(),
    }
}

/// Reads `topic_id,label[,merge_into]` rows.
pub fn read_labels(path: &Path) -> Result<TopicLabels, InsightError> {
    let mut r = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_path(path)?;
    let mut out = TopicLabels::default();
    for (i, row) in r.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| InsightError::Labels {
            line: i + 2,
            message: e.to_string(),
        })?;
        if out.labels.insert(row.topic_id, row.label).is_some() {
            return Err(InsightError::Labels {
                line: i + 2,
                message: format!("topic {} listed twice", row.topic_id),
            });
        }
        if let Some(m) = row.merge_into {
            out.merge_into.insert(row.topic_id, m);
        }
    }
    for &t in out.merge_into.keys() {
        out.resolve(t)?;
    }
    Ok(out)
}

pub fn write_labels(labels: &TopicLabels, path: &Path) -> Result<(), InsightError> {
    let mut w = csv::Writer::from_path(path)?;
    for (&topic_id, label) in &labels.labels {
        w.serialize(LabelRow {
            topic_id,
            label: label.clone(),
            merge_into: labels.merge_into.get(&topic_id).copied(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Relabels documents of merged topics; `k` is unchanged so merged topics end up empty.
pub fn apply_merges(assignment: &ClusterAssignment, labels: &TopicLabels) -> Result<ClusterAssignment, InsightError> {
    let mut out = assignment.clone();
    for l in out.labels.iter_mut() {
        let target = labels.resolve(*l)?;
        if target >= assignment.k {
            return Err(InsightError::Labels {
                line: 0,
                message: format!("merge target {target} is not below k={}", assignment.k),
            });
        }
        *l = target;
    }
    out.centroids = None;
    Ok(out)
}
