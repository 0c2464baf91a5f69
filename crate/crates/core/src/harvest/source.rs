use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use super::{parse_feed, DocumentRecord, HarvestError, HarvestQuery};

pub const DEFAULT_DELAY: Duration = Duration::from_secs(3);
pub const API_URL: &str = "http://export.arxiv.org/api/query";

const EMPTY_FEED: &str = r#"<feed xmlns="http://www.w3.org/2005/Atom"/>"#;

/// Enforces a minimum gap between consecutive requests.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    last: Option<Instant>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        Self { interval, last: None }
    }

    /// Blocks until `interval` has passed since the previous call.
    pub fn wait(&mut self) {
        if let Some(last) = self.last {
            let since = last.elapsed();
            if since < self.interval {
                thread::sleep(self.interval - since);
            }
        }
        self.last = Some(Instant::now());
    }
}

/// Something that returns the raw Atom page for a query and offset.
pub trait PageSource {
    fn page(&mut self, query: &HarvestQuery, offset: usize) -> Result<String, HarvestError>;
}

pub struct ApiSource {
    agent: ureq::Agent,
    base_url: String,
    limiter: RateLimiter,
    max_attempts: u32,
}

impl ApiSource {
    pub fn new() -> Self {
        Self::with_settings(API_URL, DEFAULT_DELAY, 3)
    }

    pub fn with_settings(base_url: &str, delay: Duration, max_attempts: u32) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build();
        Self {
            agent: config.into(),
            base_url: base_url.to_string(),
            limiter: RateLimiter::new(delay),
            max_attempts: max_attempts.max(1),
        }
    }

    fn request(&mut self, query: &HarvestQuery, offset: usize) -> Result<String, String> {
        self.limiter.wait();
        let mut resp = self
            .agent
            .get(&self.base_url)
            .query("search_query", query.search_expression())
            .query("start", offset.to_string())
            .query("max_results", query.page_size.to_string())
            .query("sortBy", "submittedDate")
            .query("sortOrder", "ascending")
            .call()
            .map_err(|e| e.to_string())?;
        resp.body_mut().read_to_string().map_err(|e| e.to_string())
    }
}

impl Default for ApiSource {
    fn default() -> Self {
        Self::new()
    }
}

impl PageSource for ApiSource {
    fn page(&mut self, query: &HarvestQuery, offset: usize) -> Result<String, HarvestError> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.request(query, offset) {
                Ok(body) => return Ok(body),
                Err(message) if attempts >= self.max_attempts => return Err(HarvestError::Http { attempts, message }),
                Err(message) => log::warn!("request at offset {offset} failed (attempt {attempts}): {message}"),
            }
        }
    }
}

/// Pages saved as `page_<offset>.xml` in a directory; a missing page ends the feed.
pub struct DirSource {
    dir: PathBuf,
}

impl DirSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl PageSource for DirSource {
    fn page(&mut self, _query: &HarvestQuery, offset: usize) -> Result<String, HarvestError> {
        let path = self.dir.join(format!("page_{offset}.xml"));
        if path.exists() {
            Ok(fs::read_to_string(path)?)
        } else {
            Ok(EMPTY_FEED.to_string())
        }
    }
}

pub fn fetch_page(
    source: &mut dyn PageSource,
    query: &HarvestQuery,
    offset: usize,
) -> Result<Vec<DocumentRecord>, HarvestError> {
    query.validate()?;
    if !offset.is_multiple_of(query.page_size) {
        return Err(HarvestError::InvalidQuery(format!(
            "offset {offset} is not a multiple of page_size {}",
            query.page_size
        )));
    }
    parse_feed(&source.page(query, offset)?)
}

/// Walks pages until an empty one, keeping the last version seen of each id.
/// Records come back sorted by id.
pub fn harvest_all(source: &mut dyn PageSource, query: &HarvestQuery) -> Result<Vec<DocumentRecord>, HarvestError> {
    let mut by_id: BTreeMap<String, DocumentRecord> = BTreeMap::new();
    let mut offset = 0;
    loop {
        let page = fetch_page(source, query, offset)?;
        if page.is_empty() {
            break;
        }
        let before = by_id.len();
        for r in page {
            by_id.insert(r.id.clone(), r);
        }
        log::info!("offset {offset}: {} records so far", by_id.len());
        if by_id.len() == before {
            log::warn!("offset {offset} returned no new records; stopping");
            break;
        }
        if query.max_records.is_some_and(|m| by_id.len() >= m) {
            break;
        }
        offset += query.page_size;
    }
    let mut out: Vec<DocumentRecord> = by_id.into_values().collect();
    if let Some(m) = query.max_records {
        out.truncate(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = include_str!("../../tests/fixtures/atom_two_entries.xml");

    struct Down {
        calls: u32,
    }

    impl PageSource for Down {
        fn page(&mut self, _: &HarvestQuery, _: usize) -> Result<String, HarvestError> {
            self.calls += 1;
            Err(HarvestError::Http {
                attempts: self.calls,
                message: "down".into(),
            })
        }
    }

    #[test]
    fn limiter_spaces_calls() {
        let mut l = RateLimiter::new(Duration::from_millis(60));
        let start = Instant::now();
        l.wait();
        assert!(start.elapsed() < Duration::from_millis(60));
        l.wait();
        l.wait();
        assert!(start.elapsed() >= Duration::from_millis(120));
    }

    #[test]
    fn dir_source_pages() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("page_0.xml"), TWO).unwrap();
        let q = HarvestQuery {
            page_size: 2,
            ..HarvestQuery::default()
        };
        let mut src = DirSource::new(dir.path());
        assert_eq!(fetch_page(&mut src, &q, 0).unwrap().len(), 2);
        assert!(fetch_page(&mut src, &q, 2).unwrap().is_empty());
        assert!(matches!(fetch_page(&mut src, &q, 1), Err(HarvestError::InvalidQuery(_))));
        let all = harvest_all(&mut src, &q).unwrap();
        assert_eq!(all, harvest_all(&mut src, &q).unwrap());
        assert_eq!(all.len(), 2);
        let capped = harvest_all(&mut src, &HarvestQuery { max_records: Some(1), ..q }).unwrap();
        assert_eq!(capped.len(), 1);
    }

    #[test]
    fn http_errors_carry_attempts() {
        let mut src = Down { calls: 0 };
        let err = fetch_page(&mut src, &HarvestQuery::default(), 0).unwrap_err();
        assert!(err.is_retriable());
        assert_eq!(src.calls, 1);
    }

    #[test]
    fn api_source_retries_then_reports() {
        // nothing listens on port 9 of localhost
        let mut src = ApiSource::with_settings("http://127.0.0.1:9/api/query", Duration::from_millis(1), 2);
        match src.page(&HarvestQuery::default(), 0) {
            Err(HarvestError::Http { attempts, .. }) => assert_eq!(attempts, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
