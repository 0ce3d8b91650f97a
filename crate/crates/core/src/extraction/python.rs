use tree_sitter::Node;

use super::doc::clean_docstring;
use super::{walk_preorder, RawPair};

pub(super) fn collect(root: Node<'_>, source: &str, out: &mut Vec<RawPair>, diags: &mut Vec<String>) {
    walk_preorder(root, |node| {
        if node.kind() != "function_definition" {
            return;
        }
        if node.has_error() {
            diags.push(format!(
                "skipped function at byte {}: parse error inside definition",
                node.start_byte()
            ));
            return;
        }
        if let Some(pair) = pair_for(node, source) {
            out.push(pair);
        }
    });
}

fn pair_for(func: Node<'_>, source: &str) -> Option<RawPair> {
    let body = func.child_by_field_name("body")?;
    let mut cursor = body.walk();
    let first = body
        .named_children(&mut cursor)
        .find(|n| n.kind() != "comment")?;
    if first.kind() != "expression_statement" || first.named_child_count() != 1 {
        return None;
    }
    let string = first.named_child(0)?;
    if string.kind() != "string" {
        return None;
    }
    let doc_span = (string.start_byte(), string.end_byte());
    let doc_text = clean_docstring(&source[doc_span.0..doc_span.1])?;

    let code_node = match func.parent() {
        Some(p) if p.kind() == "decorated_definition" => p,
        _ => func,
    };
    let code_span = (code_node.start_byte(), code_node.end_byte());
    let code_text = code_without_docstring(source, code_span, doc_span);

    if doc_text.is_empty() || code_text.trim().is_empty() {
        return None;
    }
    let function_name = func
        .child_by_field_name("name")
        .map(|n| source[n.byte_range()].to_string())
        .unwrap_or_default();
    Some(RawPair {
        function_name,
        doc_text,
        code_text,
        doc_span,
        code_span,
    })
}

/// The function source with its docstring removed. When the docstring sits
/// on lines of its own those whole lines go; otherwise only the literal.
pub(crate) fn code_without_docstring(
    source: &str,
    code_span: (usize, usize),
    doc_span: (usize, usize),
) -> String {
    let (code_start, code_end) = code_span;
    let (doc_start, doc_end) = doc_span;
    let line_start = source[..doc_start].rfind('\n').map_or(0, |i| i + 1);
    let line_end = source[doc_end..]
        .find('\n')
        .map_or(source.len(), |i| doc_end + i + 1);
    let own_lines = line_start >= code_start
        && source[line_start..doc_start].trim().is_empty()
        && source[doc_end..line_end].trim().is_empty();
    let (cut_start, cut_end) = if own_lines {
        (line_start, line_end.min(code_end))
    } else {
        (doc_start, doc_end)
    };
    let mut code = String::with_capacity(code_end - code_start);
    code.push_str(&source[code_start..cut_start]);
    code.push_str(&source[cut_end..code_end]);
    code
}
