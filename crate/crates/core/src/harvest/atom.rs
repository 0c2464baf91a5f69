use std::sync::LazyLock;

use chrono::{DateTime, Datelike};
use regex::Regex;
use roxmltree::{Document, Node};

use super::{assign_reference_category, current_year, CategoryCode, DocumentRecord, HarvestError, FIRST_YEAR};

const ATOM_NS: &str = "http://www.w3.org/2005/Atom";
const ARXIV_NS: &str = "http://arxiv.org/schemas/atom";

static VERSION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"v\d+$").expect("valid pattern"));

fn child<'a>(node: Node<'a, 'a>, ns: &str, name: &str) -> Option<Node<'a, 'a>> {
    node.children().find(|c| c.has_tag_name((ns, name)))
}

fn text_of(node: Node, ns: &str, name: &str) -> Option<String> {
    child(node, ns, name).map(|c| collapse_ws(c.text().unwrap_or("")))
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `http://arxiv.org/abs/2005.06390v2` becomes `2005.06390`.
fn short_id(raw: &str) -> String {
    let tail = raw.split_once("/abs/").map_or(raw, |(_, t)| t);
    VERSION_RE.replace(tail.trim(), "").into_owned()
}

fn parse_entry(entry: Node, index: usize) -> Result<DocumentRecord, HarvestError> {
    let fail = |message: String| HarvestError::Entry { entry: index, message };
    let raw_id = text_of(entry, ATOM_NS, "id").filter(|s| !s.is_empty()).ok_or_else(|| fail("missing <id>".into()))?;
    if raw_id.contains("/api/errors") {
        let summary = text_of(entry, ATOM_NS, "summary").unwrap_or_default();
        return Err(HarvestError::Api(summary));
    }
    let id = short_id(&raw_id);
    if id.is_empty() {
        return Err(fail(format!("cannot derive an identifier from {raw_id:?}")));
    }
    let title = text_of(entry, ATOM_NS, "title").ok_or_else(|| fail("missing <title>".into()))?;
    let published = text_of(entry, ATOM_NS, "published").ok_or_else(|| fail("missing <published>".into()))?;
    let year = DateTime::parse_from_rfc3339(&published)
        .map_err(|e| fail(format!("bad <published> {published:?}: {e}")))?
        .year();
    if !(FIRST_YEAR..=current_year()).contains(&year) {
        return Err(fail(format!("submission year {year} is out of range")));
    }
    let updated = match text_of(entry, ATOM_NS, "updated") {
        Some(u) => Some(
            DateTime::parse_from_rfc3339(&u)
                .map_err(|e| fail(format!("bad <updated> {u:?}: {e}")))?
                .date_naive(),
        ),
        None => None,
    };
    let authors = entry
        .children()
        .filter(|c| c.has_tag_name((ATOM_NS, "author")))
        .filter_map(|a| text_of(a, ATOM_NS, "name"))
        .filter(|n| !n.is_empty())
        .collect();
    let mut all_categories: Vec<CategoryCode> = Vec::new();
    for c in entry.children().filter(|c| c.has_tag_name((ATOM_NS, "category"))) {
        let Some(term) = c.attribute("term") else { continue };
        match CategoryCode::parse(term) {
            Ok(code) if !all_categories.contains(&code) => all_categories.push(code),
            Ok(_) => {}
            Err(_) => log::debug!("entry {index}: skipping category {term:?}"),
        }
    }
    Ok(DocumentRecord {
        id,
        title,
        authors,
        reference_category: assign_reference_category(&all_categories),
        all_categories,
        year,
        abstract_text: text_of(entry, ATOM_NS, "summary").unwrap_or_default(),
        doi: text_of(entry, ARXIV_NS, "doi").filter(|d| !d.is_empty()),
        updated,
    })
}

/// Parses one Atom response page. An empty feed yields no records.
pub fn parse_feed(xml: &str) -> Result<Vec<DocumentRecord>, HarvestError> {
    let doc = Document::parse(xml).map_err(|e| HarvestError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name((ATOM_NS, "feed")) {
        return Err(HarvestError::Xml(format!("root element is <{}>, not an Atom feed", root.tag_name().name())));
    }
    root.children()
        .filter(|c| c.has_tag_name((ATOM_NS, "entry")))
        .enumerate()
        .map(|(i, e)| parse_entry(e, i))
        .collect()
}
