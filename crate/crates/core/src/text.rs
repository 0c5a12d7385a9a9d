//! String normalization shared by name resolution and label snapping.

use unicode_normalization::UnicodeNormalization;

/// NFC, lowercase, trim, collapse internal whitespace.
fn fold(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    let lower = nfc.to_lowercase();
    lower.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Key used for taxonomy lookups: [`fold`] plus trailing periods removed.
pub fn normalize_name(s: &str) -> String {
    let folded = fold(s);
    folded.trim_end_matches('.').trim_end().to_string()
}

/// Key used for label snapping: [`fold`] plus leading/trailing punctuation
/// removed. Internal punctuation (hyphens, apostrophes) is kept.
pub fn normalize_label(s: &str) -> String {
    let folded = fold(s);
    folded
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace() || is_quote(c))
        .to_string()
}

fn is_quote(c: char) -> bool {
    matches!(c, '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}')
}

/// Shortest round-trip decimal, without a trailing `.0` for integral values.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_normalization() {
        assert_eq!(normalize_name("  Parus   MAJOR. "), "parus major");
        assert_eq!(normalize_name("Parus major.."), "parus major");
        // NFC: decomposed e + combining acute equals precomposed
        assert_eq!(normalize_name("Pe\u{301}rez"), normalize_name("P\u{e9}rez"));
    }

    #[test]
    fn label_normalization() {
        assert_eq!(normalize_label(" Great Tit!\n"), "great tit");
        assert_eq!(normalize_label("\"black-capped chickadee.\""), "black-capped chickadee");
        assert_eq!(normalize_label("..."), "");
    }

    #[test]
    fn numbers() {
        assert_eq!(format_number(440.0), "440");
        assert_eq!(format_number(0.75), "0.75");
        assert_eq!(format_number(261.63), "261.63");
    }
}
