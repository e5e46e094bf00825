//! Parsing of numbered LLM replies.

/// Extracts the items of a numbered list (`1)`, `1.` or `1:` prefixes), in
/// reply order. Lines without a number prefix are skipped, as are items that
/// are empty after trimming.
pub fn parse_numbered(reply: &str) -> Vec<String> {
    reply.lines().filter_map(numbered_item).collect()
}

fn numbered_item(line: &str) -> Option<String> {
    let line = line.trim_start().trim_start_matches(['-', '*', '#']).trim_start();
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    let rest = rest.strip_prefix([')', '.', ':'])?;
    let item = clean_sentence(rest);
    (!item.is_empty()).then_some(item)
}

/// Trims whitespace and wrapping quotes or emphasis markers.
pub fn clean_sentence(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c == '"' || c == '\u{201c}' || c == '\u{201d}' || c == '*')
        .trim()
        .to_string()
}

/// A single-sentence reply: first non-empty line, with any number prefix
/// removed.
pub fn parse_single(reply: &str) -> Option<String> {
    let line = reply.lines().map(str::trim).find(|l| !l.is_empty())?;
    let item = numbered_item(line).unwrap_or_else(|| clean_sentence(line));
    (!item.is_empty()).then_some(item)
}

/// Numbered items if present, otherwise every non-empty line.
pub fn parse_lines_lenient(reply: &str) -> Vec<String> {
    let numbered = parse_numbered(reply);
    if !numbered.is_empty() {
        return numbered;
    }
    reply
        .lines()
        .map(clean_sentence)
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parenthesis_numbering() {
        assert_eq!(parse_numbered("1) a\n2) b\n3) c"), vec!["a", "b", "c"]);
    }

    #[test]
    fn mixed_numbering() {
        assert_eq!(parse_numbered("1. a\n2) b"), vec!["a", "b"]);
    }

    #[test]
    fn unnumbered_reply_yields_nothing() {
        assert!(parse_numbered("Here are some ideas\nplant trees").is_empty());
    }

    /// Fixture replies paired with the items a careful reader extracts.
    #[test]
    fn fixture_corpus() {
        let corpus: [(&str, &[&str]); 20] = [
            ("1) a\n2) b", &["a", "b"]),
            ("1. a\n2. b\n3. c", &["a", "b", "c"]),
            ("1: a\n2: b", &["a", "b"]),
            ("1) a\n2. b\n3: c", &["a", "b", "c"]),
            ("Sure! Here you go:\n1) a\n2) b", &["a", "b"]),
            ("1) a\n\n2) b\n", &["a", "b"]),
            ("  1)   a  \n  2)b", &["a", "b"]),
            ("1) \"Quoted sentence.\"\n2) plain", &["Quoted sentence.", "plain"]),
            ("10) ten\n11) eleven", &["ten", "eleven"]),
            ("1)\n2) b", &["b"]),
            ("- 1) a\n- 2) b", &["a", "b"]),
            ("**1.** bold", &["bold"]),
            ("1) a\nnot numbered\n2) b", &["a", "b"]),
            ("1a) odd\n2) b", &["b"]),
            ("1) Use solar: it is cheap.", &["Use solar: it is cheap."]),
            ("3) c\n1) a", &["c", "a"]),
            ("1. First.\r\n2. Second.", &["First.", "Second."]),
            ("no list at all", &[]),
            ("", &[]),
            ("1) \u{201c}curly\u{201d}", &["curly"]),
        ];
        for (reply, expected) in corpus {
            assert_eq!(parse_numbered(reply), expected, "reply: {reply:?}");
        }
    }

    #[test]
    fn single_sentence_reply() {
        assert_eq!(parse_single("\n1) Only one.\n").as_deref(), Some("Only one."));
        assert_eq!(parse_single("  \"Just text\"  ").as_deref(), Some("Just text"));
        assert_eq!(parse_single("   \n  "), None);
    }

    #[test]
    fn lenient_fallback() {
        assert_eq!(parse_lines_lenient("a\n\nb"), vec!["a", "b"]);
        assert_eq!(parse_lines_lenient("intro\n1) a"), vec!["a"]);
    }

    proptest! {
        #[test]
        fn items_trimmed_nonempty_in_order(lines in prop::collection::vec("[ -~]{0,30}", 0..12)) {
            let reply = lines.join("\n");
            let items = parse_numbered(&reply);
            for item in &items {
                prop_assert!(!item.is_empty());
                prop_assert_eq!(item.trim(), item.as_str());
            }
            let mut cursor = 0;
            for item in &items {
                let found = reply[cursor..].find(item.as_str());
                prop_assert!(found.is_some());
                cursor += found.unwrap() + item.len();
            }
        }
    }
}
