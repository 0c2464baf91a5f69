//! Surname candidates from citation patterns.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EntityError;
use crate::textprep::parse_word_list;

/// A surname candidate and its byte offset in the source text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub position: usize,
}

const NAME: &str = r"\p{Lu}[\p{Ll}'’]+(?:-\p{Lu}[\p{Ll}'’]+)?";
const YEAR: &str = r"(?:1[89]|20)\d{2}[a-z]?";

static PATTERNS: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    [
        // Name and Name, Name & Name
        format!(r"(?P<a>{NAME})\s+(?:and|&)\s+(?P<b>{NAME})"),
        // Name et al.
        format!(r"(?P<a>{NAME})\s+et\s+al\b"),
        // Name (2003)
        format!(r"(?P<a>{NAME})\s*\(\s*{YEAR}"),
        // (Name, 2003) and (Name 2003)
        format!(r"\(\s*(?P<a>{NAME}),?\s+{YEAR}"),
        // reference entry "Surname, I." at line start, optionally numbered
        format!(r"(?m)^\s*(?:\[\d+\]|\d+\.)?\s*(?P<a>{NAME}),\s+\p{{Lu}}\."),
        // further authors of a reference entry: ", Surname, I." / "and Surname, I."
        format!(r"(?:,|\band)\s+(?P<a>{NAME}),\s+\p{{Lu}}\."),
    ]
    .iter()
    .map(|p| Regex::new(p).expect("valid pattern"))
    .collect()
});

/// Capitalized words that match the patterns but are not names.
static NON_NAMES: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    [
        "A", "An", "And", "Appendix", "As", "Assumption", "At", "Bank", "By", "Case", "Chapter", "Conference",
        "Corollary", "Definition", "Department", "Eq", "Equation", "Example", "Fig", "Figure", "For", "From",
        "Hence", "However", "If", "In", "Institute", "It", "Journal", "Lemma", "Let", "Model", "Note", "Of", "On",
        "Our", "Press", "Proceedings", "Proof", "Proposition", "Remark", "Review", "Section", "See", "Society",
        "Springer", "Step", "Table", "The", "Then", "Theorem", "There", "These", "This", "Thus", "To", "University",
        "We", "When", "While", "With", "Wiley",
        // words of journal titles caught by the "Name and Name" pattern
        "Analysis", "Applications", "Applied", "Banking", "Econometrics", "Economic", "Economics", "Finance",
        "Financial", "Insurance", "Letters", "Management", "Markets", "Mathematical", "Mathematics", "Operations",
        "Physics", "Probability", "Quantitative", "Research", "Risk", "Science", "Statistics", "Stochastics",
        "Studies", "Theory",
    ]
    .into_iter()
    .collect()
});

pub fn extract_person_candidates(raw_text: &str) -> Vec<Candidate> {
    let mut found = BTreeSet::new();
    for re in PATTERNS.iter() {
        for caps in re.captures_iter(raw_text) {
            for group in ["a", "b"] {
                if let Some(m) = caps.name(group) {
                    if !NON_NAMES.contains(m.as_str()) {
                        found.insert((m.start(), m.as_str().to_string()));
                    }
                }
            }
        }
    }
    found
        .into_iter()
        .map(|(position, name)| Candidate { name, position })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameLexicon {
    first_names: BTreeSet<String>,
}

impl NameLexicon {
    pub fn new(first_names: BTreeSet<String>) -> Result<Self, EntityError> {
        if first_names.is_empty() {
            return Err(EntityError::EmptyLexicon);
        }
        Ok(Self {
            first_names: first_names.into_iter().map(|n| n.to_lowercase()).collect(),
        })
    }

    pub fn bundled() -> Self {
        Self::new(parse_word_list(include_str!("../../data/entities/first_names.txt"))).expect("bundled list")
    }

    pub fn from_file(path: &Path) -> Result<Self, EntityError> {
        Self::new(parse_word_list(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.first_names.contains(&name.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.first_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_names.is_empty()
    }
}

pub fn filter_first_names(candidates: &[Candidate], lexicon: &NameLexicon) -> Vec<Candidate> {
    candidates.iter().filter(|c| !lexicon.contains(&c.name)).cloned().collect()
}

/// Drops candidates on a case-insensitive exclusion list.
pub fn exclude_names(candidates: &[Candidate], excluded: &BTreeSet<String>) -> Vec<Candidate> {
    let lower: BTreeMap<String, ()> = excluded.iter().map(|e| (e.to_lowercase(), ())).collect();
    candidates
        .iter()
        .filter(|c| !lower.contains_key(&c.name.to_lowercase()))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(text: &str) -> Vec<String> {
        extract_person_candidates(text).into_iter().map(|c| c.name).collect()
    }

    #[test]
    fn citation_patterns() {
        assert_eq!(names("as shown in Bianchi and Tassinari (2020)"), vec!["Bianchi", "Tassinari"]);
        assert!(names("").is_empty());
        assert_eq!(names("the clearing model of Eisenberg and Noe is used"), vec!["Eisenberg", "Noe"]);
        assert_eq!(names("following Heston et al. we"), vec!["Heston"]);
        assert_eq!(names("as in (Merton, 1973) and (Black 1976)"), vec!["Merton", "Black"]);
        assert_eq!(
            names("[3] Bianchi, M. L., Tassinari, G. L. Forward-looking portfolio.\n4. Rachev, S. T. and Mittnik, S. Stable"),
            vec!["Bianchi", "Tassinari", "Rachev", "Mittnik"]
        );
        assert_eq!(names("Table and Figure (2020) In (2019)"), Vec::<String>::new());
        assert_eq!(names("Black-Scholes (1973)"), vec!["Black-Scholes"]);
    }

    #[test]
    fn positions_are_byte_offsets() {
        let text = "see Bianchi and Tassinari (2020)";
        let c = extract_person_candidates(text);
        assert_eq!(&text[c[1].position..c[1].position + 9], "Tassinari");
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn first_name_filter() {
        let lex = NameLexicon::new(["michele".to_string()].into()).unwrap();
        let cands = vec![
            Candidate { name: "Michele".into(), position: 0 },
            Candidate { name: "Bianchi".into(), position: 8 },
        ];
        assert_eq!(filter_first_names(&cands, &lex), vec![cands[1].clone()]);
        assert!(filter_first_names(&[], &lex).is_empty());
        let shouty = vec![Candidate { name: "MICHELE".into(), position: 0 }];
        assert!(filter_first_names(&shouty, &lex).is_empty());
        let once = filter_first_names(&cands, &lex);
        assert_eq!(filter_first_names(&once, &lex), once);
        assert!(NameLexicon::new(BTreeSet::new()).is_err());
        assert!(NameLexicon::bundled().contains("Michele"));
    }

    #[test]
    fn exclusions() {
        let cands = vec![Candidate { name: "Zhou".into(), position: 0 }];
        assert!(exclude_names(&cands, &["zhou".to_string()].into()).is_empty());
    }
}
