//! Deterministic suffix-rule lemmatizer.
//!
//! Handles plural `-s`/`-es`/`-ies`, verbal `-ed`/`-ing` (undoing consonant
//! doubling and restoring a silent `e`), backed by an exceptions table for
//! irregular forms and words whose final `s` is not inflectional.

use std::collections::HashMap;
use std::sync::OnceLock;

const EXCEPTIONS: &[(&str, &str)] = &[
    ("data", "data"),
    ("analyses", "analysis"),
    ("hypotheses", "hypothesis"),
    ("theses", "thesis"),
    ("bases", "basis"),
    ("crises", "crisis"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("vertices", "vertex"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("children", "child"),
    ("people", "people"),
    ("women", "woman"),
    ("men", "man"),
    ("series", "series"),
    ("species", "species"),
    ("news", "news"),
    ("economics", "economics"),
    ("mathematics", "mathematics"),
    ("physics", "physics"),
    ("statistics", "statistics"),
    ("econometrics", "econometrics"),
    ("always", "always"),
    ("perhaps", "perhaps"),
    ("whereas", "whereas"),
    ("towards", "towards"),
    ("afterwards", "afterwards"),
    ("during", "during"),
    ("nothing", "nothing"),
    ("something", "something"),
    ("anything", "anything"),
    ("everything", "everything"),
    ("morning", "morning"),
    ("evening", "evening"),
    ("thing", "thing"),
    ("things", "thing"),
    ("being", "be"),
    ("using", "use"),
    ("used", "use"),
    ("uses", "use"),
    ("was", "be"),
    ("were", "be"),
    ("is", "be"),
    ("are", "be"),
    ("been", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("went", "go"),
    ("gone", "go"),
    ("made", "make"),
    ("making", "make"),
    ("taken", "take"),
    ("took", "take"),
    ("given", "give"),
    ("gave", "give"),
    ("shown", "show"),
    ("known", "know"),
    ("found", "find"),
    ("paid", "pay"),
    ("sold", "sell"),
    ("bought", "buy"),
    ("held", "hold"),
    ("led", "lead"),
    ("left", "left"),
    ("hedged", "hedge"),
    ("hedging", "hedge"),
    ("hedges", "hedge"),
    ("pledged", "pledge"),
    ("judged", "judge"),
    ("changed", "change"),
    ("changing", "change"),
    ("ranged", "range"),
    ("merged", "merge"),
    ("emerged", "emerge"),
    ("emerging", "emerge"),
    ("converged", "converge"),
    ("arranged", "arrange"),
    ("exchanged", "exchange"),
    ("charged", "charge"),
    ("averaged", "average"),
    ("leveraged", "leverage"),
    ("managed", "manage"),
    ("engaged", "engage"),
    ("solved", "solve"),
    ("involved", "involve"),
    ("involving", "involve"),
    ("derived", "derive"),
    ("observed", "observe"),
    ("received", "receive"),
    ("proved", "prove"),
    ("improved", "improve"),
    ("moved", "move"),
    ("removed", "remove"),
    ("achieved", "achieve"),
    ("believed", "believe"),
    ("continued", "continue"),
    ("valued", "value"),
    ("issued", "issue"),
    ("argued", "argue"),
    ("caused", "cause"),
    ("increased", "increase"),
    ("decreased", "decrease"),
    ("released", "release"),
    ("purchased", "purchase"),
    ("proposed", "propose"),
    ("imposed", "impose"),
    ("supposed", "suppose"),
    ("composed", "compose"),
    ("exposed", "expose"),
    ("closed", "close"),
    ("focused", "focus"),
    ("focusing", "focus"),
    ("biased", "bias"),
];

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| EXCEPTIONS.iter().copied().collect())
}

fn is_vowel(chars: &[char], i: usize) -> bool {
    match chars[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => true,
        'y' => i > 0 && !is_vowel(chars, i - 1),
        _ => false,
    }
}

/// Porter-style measure: number of vowel-consonant sequences.
fn measure(chars: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..chars.len() {
        let v = is_vowel(chars, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

fn has_vowel(chars: &[char]) -> bool {
    (0..chars.len()).any(|i| is_vowel(chars, i))
}

/// Consonant-vowel-consonant ending where the last consonant is not w, x or y.
fn ends_cvc(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 3
        && !is_vowel(chars, n - 3)
        && is_vowel(chars, n - 2)
        && !is_vowel(chars, n - 1)
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
}

fn ends_double_consonant(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 2 && chars[n - 1] == chars[n - 2] && !is_vowel(chars, n - 1)
}

/// Repairs a stem left after removing `-ed` or `-ing`.
fn restore_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") || stem.ends_with("ur") {
        return format!("{stem}e");
    }
    if ends_double_consonant(&chars) && !matches!(chars[chars.len() - 1], 'l' | 's' | 'z') {
        return chars[..chars.len() - 1].iter().collect();
    }
    if measure(&chars) == 1 && ends_cvc(&chars) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn strip_verbal(word: &str) -> Option<String> {
    if let Some(stem) = word.strip_suffix("ied") {
        if stem.chars().count() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    if word.ends_with("eed") {
        return None;
    }
    for suffix in ["ed", "ing"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            let chars: Vec<char> = stem.chars().collect();
            if chars.len() >= 3 && has_vowel(&chars) {
                return Some(restore_stem(stem));
            }
        }
    }
    None
}

fn strip_plural(word: &str) -> Option<String> {
    if let Some(stem) = word.strip_suffix("ies") {
        if stem.chars().count() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    for suffix in ["sses", "xes", "ches", "shes", "zzes"] {
        if word.ends_with(suffix) {
            return Some(word[..word.len() - 2].to_string());
        }
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return None;
    }
    let stem = word.strip_suffix('s')?;
    (stem.chars().count() >= 3).then(|| stem.to_string())
}

/// Lemma of a single token: lowercased, then reduced by the suffix rules.
pub fn lemma(token: &str) -> String {
    let word = token.to_lowercase();
    if let Some(&mapped) = exceptions().get(word.as_str()) {
        return mapped.to_string();
    }
    if word.chars().count() <= 3 {
        return word;
    }
    if let Some(stem) = strip_plural(&word) {
        return stem;
    }
    if let Some(stem) = strip_verbal(&word) {
        return stem;
    }
    word
}
