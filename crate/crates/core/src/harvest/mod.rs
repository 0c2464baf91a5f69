//! Preprint metadata harvesting from the arXiv Atom API and a local record store.

mod atom;
mod source;
mod store;

pub use atom::parse_feed;
pub use source::{fetch_page, harvest_all, ApiSource, DirSource, PageSource, RateLimiter, API_URL, DEFAULT_DELAY};
pub use store::{load_records, pdf_urls, store_records};

use std::fmt;
use std::sync::LazyLock;

use chrono::{Datelike, NaiveDate};
use regex::Regex;
use serde::{Deserialize, Serialize};

pub const QFIN_DOMAIN: &str = "q-fin";
pub const QFIN_CATEGORIES: [&str; 9] = [
    "q-fin.CP", "q-fin.EC", "q-fin.GN", "q-fin.MF", "q-fin.PM", "q-fin.PR", "q-fin.RM", "q-fin.ST", "q-fin.TR",
];
pub const FIRST_YEAR: i32 = 1991;
pub const DEFAULT_PAGE_SIZE: usize = 200;
pub const MAX_PAGE_SIZE: usize = 2000;

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("invalid category code {0:?}")]
    InvalidCategory(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("request failed after {attempts} attempt(s): {message}")]
    Http { attempts: u32, message: String },
    #[error("malformed feed: {0}")]
    Xml(String),
    #[error("malformed feed entry {entry}: {message}")]
    Entry { entry: usize, message: String },
    #[error("API error: {0}")]
    Api(String),
    #[error("store io: {0}")]
    Io(#[from] std::io::Error),
    #[error("store line {line}: {source}")]
    StoreLine { line: usize, source: serde_json::Error },
    #[error("store json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarvestError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, HarvestError::Http { .. })
    }
}

static CATEGORY_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[a-z]+(-[a-z]+)?\.[A-Z]{2,3}$").expect("valid pattern"));

/// A subject class such as `q-fin.PR`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CategoryCode(String);

impl CategoryCode {
    pub fn parse(code: &str) -> Result<Self, HarvestError> {
        if CATEGORY_RE.is_match(code) {
            Ok(Self(code.to_string()))
        } else {
            Err(HarvestError::InvalidCategory(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn domain(&self) -> &str {
        self.0.split_once('.').map_or(&self.0, |(d, _)| d)
    }
}

impl TryFrom<String> for CategoryCode {
    type Error = HarvestError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<CategoryCode> for String {
    fn from(c: CategoryCode) -> Self {
        c.0
    }
}

impl fmt::Display for CategoryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub all_categories: Vec<CategoryCode>,
    pub reference_category: Option<CategoryCode>,
    pub year: i32,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated: Option<NaiveDate>,
}

/// First category of the quantitative-finance domain, in listing order.
pub fn assign_reference_category(all_categories: &[CategoryCode]) -> Option<CategoryCode> {
    all_categories.iter().find(|c| c.domain() == QFIN_DOMAIN).cloned()
}

pub fn current_year() -> i32 {
    chrono::Utc::now().year()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestQuery {
    pub categories: Vec<CategoryCode>,
    pub from_year: i32,
    pub to_year: i32,
    pub page_size: usize,
    pub max_records: Option<usize>,
}

impl Default for HarvestQuery {
    fn default() -> Self {
        Self {
            categories: QFIN_CATEGORIES.iter().map(|c| CategoryCode(c.to_string())).collect(),
            from_year: FIRST_YEAR,
            to_year: current_year(),
            page_size: DEFAULT_PAGE_SIZE,
            max_records: None,
        }
    }
}

impl HarvestQuery {
    pub fn validate(&self) -> Result<(), HarvestError> {
        if self.page_size == 0 || self.page_size > MAX_PAGE_SIZE {
            return Err(HarvestError::InvalidQuery(format!(
                "page_size must be in 1..={MAX_PAGE_SIZE}, got {}",
                self.page_size
            )));
        }
        if self.from_year > self.to_year {
            return Err(HarvestError::InvalidQuery(format!(
                "from_year {} is after to_year {}",
                self.from_year, self.to_year
            )));
        }
        if self.categories.is_empty() {
            return Err(HarvestError::InvalidQuery("at least one category is required".into()));
        }
        Ok(())
    }

    /// The `search_query` parameter of the API.
    pub fn search_expression(&self) -> String {
        let cats: Vec<String> = self.categories.iter().map(|c| format!("cat:{c}")).collect();
        let cats = if cats.len() == 1 {
            cats[0].clone()
        } else {
            format!("({})", cats.join(" OR "))
        };
        format!(
            "{cats} AND submittedDate:[{}01010000 TO {}12312359]",
            self.from_year, self.to_year
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cats(codes: &[&str]) -> Vec<CategoryCode> {
        codes.iter().map(|c| CategoryCode::parse(c).unwrap()).collect()
    }

    #[test]
    fn category_pattern() {
        for ok in ["q-fin.PR", "cs.LG", "stat.ML", "math.OC", "q-fin.CP"] {
            assert!(CategoryCode::parse(ok).is_ok(), "{ok}");
        }
        for bad in ["physics.soc-ph", "qfin", "q-fin.pr", "q-fin.ABCD", ".PR", "Q-FIN.PR"] {
            assert!(CategoryCode::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(CategoryCode::parse("q-fin.PR").unwrap().domain(), "q-fin");
    }

    #[test]
    fn reference_category_rule() {
        assert_eq!(
            assign_reference_category(&cats(&["cs.LG", "q-fin.PM", "q-fin.PR"])),
            Some(cats(&["q-fin.PM"])[0].clone())
        );
        assert_eq!(
            assign_reference_category(&cats(&["q-fin.ST"])).unwrap().as_str(),
            "q-fin.ST"
        );
        assert_eq!(assign_reference_category(&cats(&["cs.LG", "stat.ML"])), None);
        assert_eq!(assign_reference_category(&[]), None);
    }

    #[test]
    fn query_validation() {
        let q = HarvestQuery::default();
        assert_eq!(q.page_size, 200);
        q.validate().unwrap();
        assert!(HarvestQuery { page_size: 2001, ..q.clone() }.validate().is_err());
        assert!(HarvestQuery { page_size: 0, ..q.clone() }.validate().is_err());
        assert!(HarvestQuery { from_year: 2020, to_year: 2019, ..q.clone() }.validate().is_err());
        let one = HarvestQuery {
            categories: cats(&["q-fin.PR"]),
            from_year: 2019,
            to_year: 2020,
            ..q
        };
        assert_eq!(
            one.search_expression(),
            "cat:q-fin.PR AND submittedDate:[201901010000 TO 202012312359]"
        );
    }

    #[test]
    fn category_serde_is_checked() {
        assert!(serde_json::from_str::<CategoryCode>("\"q-fin.TR\"").is_ok());
        assert!(serde_json::from_str::<CategoryCode>("\"nope\"").is_err());
    }
}
