use serde::{Deserialize, Serialize};

pub const FLESCH_BASE: f64 = 206.835;
pub const FLESCH_SENTENCE_WEIGHT: f64 = 1.015;
pub const FLESCH_SYLLABLE_WEIGHT: f64 = 84.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScore {
    pub doc_id: String,
    pub flesch: f64,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

/// Flesch reading ease. Empty text scores the formula's constant term.
pub fn flesch_score(doc_id: &str, text: &str) -> ReadabilityScore {
    let words: Vec<&str> = text
        .split_whitespace()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .collect();
    let syllables: usize = words.iter().map(|w| count_syllables(w)).sum();
    let sentences = count_sentences(text).max(1);
    let flesch = if words.is_empty() {
        FLESCH_BASE
    } else {
        let w = words.len() as f64;
        FLESCH_BASE
            - FLESCH_SENTENCE_WEIGHT * (w / sentences as f64)
            - FLESCH_SYLLABLE_WEIGHT * (syllables as f64 / w)
    };
    ReadabilityScore {
        doc_id: doc_id.to_string(),
        flesch,
        words: words.len(),
        sentences,
        syllables,
    }
}

/// Runs of `.`, `!` or `?` each end one sentence.
fn count_sentences(text: &str) -> usize {
    let mut count = 0;
    let mut in_run = false;
    for c in text.chars() {
        let terminal = matches!(c, '.' | '!' | '?');
        if terminal && !in_run {
            count += 1;
        }
        in_run = terminal;
    }
    count
}

/// Vowel groups, minus a silent final `e`; at least one per word.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| "aeiouyàáâãäåæèéêëìíîïòóôõöøùúûüý".contains(c);
    let mut groups = 0;
    let mut prev = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = letters.len();
    let silent_e = letters[n - 1] == 'e'
        && !(n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]))
        && n >= 2
        && !is_vowel(letters[n - 2]);
    if silent_e && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}
