/// Letters are alphabetic characters of the Latin script. Greek and other
/// symbol-like alphabets that show up in extracted formulas are dropped.
pub fn is_word_char(c: char) -> bool {
    if c.is_ascii_alphabetic() {
        return true;
    }
    let cp = c as u32;
    // Latin-1 Supplement letters (minus × and ÷) through Latin Extended-B,
    // plus Latin Extended Additional.
    let latin = (0x00C0..=0x024F).contains(&cp) && cp != 0x00D7 && cp != 0x00F7
        || (0x1E00..=0x1EFF).contains(&cp);
    latin && c.is_alphabetic()
}

/// Splits text into maximal letter runs and standalone 4-digit numerals.
pub(crate) fn scan(text: &str) -> (Vec<String>, Vec<u16>) {
    let mut words = Vec::new();
    let mut years = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            words.push(chars[start..i].iter().collect());
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let before_ok = start == 0 || !chars[start - 1].is_alphanumeric();
            let after_ok = i == chars.len() || !chars[i].is_alphanumeric();
            if i - start == 4 && before_ok && after_ok {
                let value: u16 = chars[start..i].iter().collect::<String>().parse().unwrap_or(0);
                if (1000..=2999).contains(&value) {
                    years.push(value);
                }
            }
        } else {
            i += 1;
        }
    }
    (words, years)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters() {
        assert!(is_word_char('é'));
        assert!(is_word_char('Z'));
        assert!(!is_word_char('α'));
        assert!(!is_word_char('×'));
        assert!(!is_word_char('7'));
    }

    #[test]
    fn numerals() {
        let (w, y) = scan("in 1987, v2 x2005 12345 2005.06390 (2020a) 0999");
        assert_eq!(w, vec!["in", "v", "x", "a"]);
        assert_eq!(y, vec![1987, 2005]);
    }
}
