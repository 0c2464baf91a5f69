//! CSV, JSON and SVG report files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{InsightError, Projection2D, TopicSummary, TrendTable};

pub struct ReportInput<'a> {
    pub summaries: &'a [TopicSummary],
    pub trends: &'a TrendTable,
    pub projection: Option<&'a Projection2D>,
    /// Topic of each projected point, in projection order.
    pub point_topics: &'a [usize],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileManifest {
    pub files: Vec<FileEntry>,
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], manifest: &mut FileManifest) -> Result<(), InsightError> {
    fs::write(dir.join(name), bytes)?;
    manifest.files.push(FileEntry {
        name: name.to_string(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(bytes)),
    });
    Ok(())
}

fn trends_csv(trends: &TrendTable) -> Result<Vec<u8>, InsightError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["topic", "year", "count"])?;
    for (topic, years) in &trends.counts {
        for (year, count) in years {
            w.write_record([topic.to_string(), year.to_string(), count.to_string()])?;
        }
    }
    w.into_inner().map_err(|e| InsightError::Io(e.into_error()))
}

fn projection_csv(p: &Projection2D, topics: &[usize]) -> Result<Vec<u8>, InsightError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["doc_id", "x", "y", "topic"])?;
    for (i, id) in p.doc_ids.iter().enumerate() {
        let topic = topics.get(i).map_or(String::new(), |t| t.to_string());
        w.write_record([
            id.clone(),
            format!("{:.6}", p.coordinates[[i, 0]]),
            format!("{:.6}", p.coordinates[[i, 1]]),
            topic,
        ])?;
    }
    w.into_inner().map_err(|e| InsightError::Io(e.into_error()))
}

/// One bar-chart panel per topic, laid out in a near-square grid.
pub fn render_trends_svg(summaries: &[TopicSummary], trends: &TrendTable) -> String {
    let topics: Vec<(usize, String)> = if summaries.is_empty() {
        trends.counts.keys().map(|&t| (t, format!("topic-{t}"))).collect()
    } else {
        summaries.iter().map(|s| (s.topic_id, s.label.clone())).collect()
    };
    let years = trends.years();
    let max_count = trends.counts.values().flat_map(|y| y.values()).copied().max().unwrap_or(1).max(1);
    let cols = (topics.len() as f64).sqrt().ceil().max(1.0) as usize;
    let rows = topics.len().div_ceil(cols).max(1);
    let (pw, ph) = (240.0, 150.0);
    let (left, top, plot_w, plot_h) = (30.0, 24.0, 200.0, 100.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="10">"#,
        cols as f64 * pw,
        rows as f64 * ph
    );
    for (n, (topic, label)) in topics.iter().enumerate() {
        let (ox, oy) = ((n % cols) as f64 * pw, (n / cols) as f64 * ph);
        let _ = writeln!(svg, r#"<g class="panel" transform="translate({ox},{oy})">"#);
        let _ = writeln!(svg, r#"<text x="{left}" y="14" font-weight="bold">{}</text>"#, escape(label));
        let _ = writeln!(
            svg,
            r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999"/>"##
        );
        let counts = trends.counts.get(topic);
        let bar_w = plot_w / years.len().max(1) as f64;
        for (i, year) in years.iter().enumerate() {
            let c = counts.and_then(|m| m.get(year)).copied().unwrap_or(0);
            let h = plot_h * c as f64 / max_count as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{year}: {c}</title></rect>"#,
                left + i as f64 * bar_w + 0.5,
                top + plot_h - h,
                (bar_w - 1.0).max(0.5),
                h,
                PALETTE[topic % PALETTE.len()]
            );
        }
        if let (Some(first), Some(last)) = (years.first(), years.last()) {
            let _ = writeln!(svg, r#"<text x="{left}" y="{}">{first}</text>"#, top + plot_h + 12.0);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{last}</text>"#,
                left + plot_w,
                top + plot_h + 12.0
            );
        }
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{max_count}</text>"#, left - 3.0, top + 8.0);
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}

/// Scatter of the projection coloured by topic, with each topic's label at its mean position.
pub fn render_projection_svg(p: &Projection2D, point_topics: &[usize], summaries: &[TopicSummary]) -> String {
    let (size, pad) = (600.0, 30.0);
    let c = &p.coordinates;
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for row in c.rows() {
        xmin = xmin.min(row[0]);
        xmax = xmax.max(row[0]);
        ymin = ymin.min(row[1]);
        ymax = ymax.max(row[1]);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-9);
    let sx = |x: f64| pad + (x - xmin) / span * (size - 2.0 * pad);
    let sy = |y: f64| size - pad - (y - ymin) / span * (size - 2.0 * pad);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="11">"#
    );
    for (i, row) in c.rows().into_iter().enumerate() {
        let topic = point_topics.get(i).copied().unwrap_or(0);
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
            sx(row[0]),
            sy(row[1]),
            PALETTE[topic % PALETTE.len()]
        );
    }
    let topics: BTreeSet<usize> = point_topics.iter().copied().collect();
    for t in topics {
        let members: Vec<usize> = (0..c.nrows()).filter(|&i| point_topics.get(i) == Some(&t)).collect();
        let mx = members.iter().map(|&i| c[[i, 0]]).sum::<f64>() / members.len() as f64;
        let my = members.iter().map(|&i| c[[i, 1]]).sum::<f64>() / members.len() as f64;
        let label = summaries
            .iter()
            .find(|s| s.topic_id == t)
            .map_or(format!("topic-{t}"), |s| s.label.clone());
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
            sx(mx),
            sy(my),
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the report files plus `manifest.json` listing each with its size and hash.
pub fn emit_reports(input: &ReportInput, out_dir: &Path) -> Result<FileManifest, InsightError> {
    fs::create_dir_all(out_dir)?;
    let mut manifest = FileManifest::default();
    write_file(out_dir, "trends.csv", &trends_csv(input.trends)?, &mut manifest)?;
    let mut topics_json = serde_json::to_vec_pretty(input.summaries)?;
    topics_json.push(b'\n');
    write_file(out_dir, "topics.json", &topics_json, &mut manifest)?;
    write_file(
        out_dir,
        "trends.svg",
        render_trends_svg(input.summaries, input.trends).as_bytes(),
        &mut manifest,
    )?;
    if let Some(p) = input.projection {
        write_file(out_dir, "projection.csv", &projection_csv(p, input.point_topics)?, &mut manifest)?;
        write_file(
            out_dir,
            "projection.svg",
            render_projection_svg(p, input.point_topics, input.summaries).as_bytes(),
            &mut manifest,
        )?;
    }
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    fs::write(out_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn summary(t: usize) -> TopicSummary {
        TopicSummary {
            topic_id: t,
            label: format!("T<{t}>"),
            size: 1,
            representative_doc_ids: vec![format!("d{t}")],
            representative_distances: vec![0.0],
            representative_titles: vec![],
            yearly_counts: BTreeMap::new(),
        }
    }

    #[test]
    fn thirty_panels() {
        let summaries: Vec<TopicSummary> = (0..30).map(summary).collect();
        let mut trends = TrendTable::default();
        for t in 0..30 {
            trends.counts.insert(t, BTreeMap::from([(2010, t + 1), (2011, 1)]));
        }
        let svg = render_trends_svg(&summaries, &trends);
        assert_eq!(svg.matches(r#"<g class="panel""#).count(), 30);
        assert!(svg.contains("T&lt;3&gt;"));
    }

    #[test]
    fn empty_trends_header_only_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let trends = TrendTable::default();
        let m = emit_reports(
            &ReportInput {
                summaries: &[],
                trends: &trends,
                projection: None,
                point_topics: &[],
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("trends.csv")).unwrap(), "topic,year,count\n");
        for f in &m.files {
            assert_eq!(fs::metadata(dir.path().join(&f.name)).unwrap().len(), f.bytes);
        }
        let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["trends.csv", "topics.json", "trends.svg"]);
    }

    #[test]
    fn projection_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = Projection2D {
            doc_ids: vec!["a".into(), "b".into()],
            coordinates: ndarray::arr2(&[[0.0, 1.0], [2.0, -1.0]]),
            perplexity: 1.0,
            iterations: 0,
            final_kl: 0.0,
            kl_history: vec![],
        };
        let trends = TrendTable::default();
        let summaries = vec![summary(0), summary(1)];
        let m = emit_reports(
            &ReportInput {
                summaries: &summaries,
                trends: &trends,
                projection: Some(&p),
                point_topics: &[0, 1],
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(m.files.len(), 5);
        let csv = fs::read_to_string(dir.path().join("projection.csv")).unwrap();
        assert_eq!(csv, "doc_id,x,y,topic\na,0.000000,1.000000,0\nb,2.000000,-1.000000,1\n");
        let svg = fs::read_to_string(dir.path().join("projection.svg")).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
