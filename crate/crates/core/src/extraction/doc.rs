//! Delimiter stripping for the documentation forms we recognise.
//!
//! Each function maps the exact source slice covered by a pair's `doc_span`
//! to its `doc_text`, so the two can always be re-derived from each other.

/// Strips a Python string literal used as a docstring.
///
/// Returns `None` for byte strings, f-strings and anything that is not a
/// plain (optionally raw/unicode-prefixed) string literal.
pub fn clean_docstring(literal: &str) -> Option<String> {
    let quote_at = literal.find(['"', '\''])?;
    let prefix = &literal[..quote_at];
    if !prefix.chars().all(|c| matches!(c, 'r' | 'R' | 'u' | 'U')) {
        return None;
    }
    let body = &literal[quote_at..];
    let inner = ["\"\"\"", "'''", "\"", "'"].iter().find_map(|q| {
        (body.len() >= 2 * q.len() && body.starts_with(q) && body.ends_with(q))
            .then(|| &body[q.len()..body.len() - q.len()])
    })?;
    Some(cleandoc(inner))
}

/// Python `inspect.cleandoc` semantics: the first line loses its leading
/// whitespace, later lines lose their common indentation, trailing
/// whitespace and surrounding blank lines go.
pub fn cleandoc(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let indent = lines
        .iter()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    let cleaned: Vec<&str> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                l.trim()
            } else if l.trim().is_empty() {
                ""
            } else {
                l.get(indent..).unwrap_or_else(|| l.trim_start()).trim_end()
            }
        })
        .collect();
    trim_blank_lines(&cleaned)
}

/// Strips a `/** ... */` block, including the conventional leading `*` on
/// each line.
pub fn clean_block_comment(text: &str) -> String {
    let inner = text
        .strip_prefix("/**")
        .unwrap_or(text)
        .strip_suffix("*/")
        .unwrap_or(text);
    let lines: Vec<&str> = inner
        .lines()
        .map(|l| {
            let l = l.trim_start();
            let l = match l.strip_prefix('*') {
                Some(rest) => rest.strip_prefix(' ').unwrap_or(rest),
                None => l,
            };
            l.trim_end()
        })
        .collect();
    trim_blank_lines(&lines)
}

/// Strips a contiguous run of `///` line comments.
pub fn clean_line_comments(text: &str) -> String {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| {
            let l = l.trim_start();
            let l = l.strip_prefix("///").unwrap_or(l);
            l.strip_prefix(' ').unwrap_or(l).trim_end()
        })
        .collect();
    trim_blank_lines(&lines)
}

fn trim_blank_lines(lines: &[&str]) -> String {
    let start = lines.iter().position(|l| !l.is_empty());
    let end = lines.iter().rposition(|l| !l.is_empty());
    match (start, end) {
        (Some(s), Some(e)) => lines[s..=e].join("\n"),
        _ => String::new(),
    }
}

pub(crate) fn is_block_doc(text: &str) -> bool {
    text.starts_with("/**") && !text.starts_with("/**/") && text.ends_with("*/") && text.len() >= 5
}

pub(crate) fn is_line_doc(text: &str) -> bool {
    text.starts_with("///") && !text.starts_with("////")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn docstring_quotes_and_prefixes() {
        assert_eq!(clean_docstring(r#""""Hi.""""#).as_deref(), Some("Hi."));
        assert_eq!(clean_docstring("'''Hi.'''").as_deref(), Some("Hi."));
        assert_eq!(clean_docstring(r#"r"""raw \d""""#).as_deref(), Some(r"raw \d"));
        assert_eq!(clean_docstring(r#""one""#).as_deref(), Some("one"));
        assert_eq!(clean_docstring(r#"f"""x{y}""""#), None);
        assert_eq!(clean_docstring(r#"b"""x""""#), None);
    }

    #[test]
    fn docstring_dedent() {
        let lit = "\"\"\"\n    Summary line.\n\n    Details\n      indented more.\n    \"\"\"";
        assert_eq!(
            clean_docstring(lit).unwrap(),
            "Summary line.\n\nDetails\n  indented more."
        );
    }

    #[test]
    fn block_comment_stars() {
        let c = "/**\n * Returns the count.\n * @param teamID The Team ID\n */";
        assert_eq!(clean_block_comment(c), "Returns the count.\n@param teamID The Team ID");
        assert_eq!(clean_block_comment("/** one liner */"), "one liner");
    }

    #[test]
    fn line_comment_run() {
        let c = "/// first\n  ///second\n  ///";
        assert_eq!(clean_line_comments(c), "first\nsecond");
    }

    #[test]
    fn doc_form_predicates() {
        assert!(is_block_doc("/** x */"));
        assert!(!is_block_doc("/**/"));
        assert!(!is_block_doc("/* x */"));
        assert!(is_line_doc("/// x"));
        assert!(!is_line_doc("//// x"));
        assert!(!is_line_doc("// x"));
    }
}
