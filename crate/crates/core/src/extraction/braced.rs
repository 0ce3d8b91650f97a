//! TypeScript, Java and C++: a documentation comment immediately preceding
//! a function definition.

use tree_sitter::Node;

use super::doc::{clean_block_comment, clean_line_comments, is_block_doc, is_line_doc};
use super::{walk_preorder, RawPair, SourceLanguage};

pub(super) fn collect(
    root: Node<'_>,
    source: &str,
    language: SourceLanguage,
    out: &mut Vec<RawPair>,
    diags: &mut Vec<String>,
) {
    walk_preorder(root, |node| {
        let Some(name) = function_name(node, source, language) else {
            return;
        };
        if node.has_error() {
            diags.push(format!(
                "skipped function at byte {}: parse error inside definition",
                node.start_byte()
            ));
            return;
        }
        if let Some(pair) = pair_for(node, name, source, language) {
            out.push(pair);
        }
    });
}

/// Returns the function name when `node` is a function-like definition with
/// a body in `language`.
fn function_name(node: Node<'_>, source: &str, language: SourceLanguage) -> Option<String> {
    let text = |n: Node<'_>| source[n.byte_range()].to_string();
    match language {
        SourceLanguage::TypeScript => match node.kind() {
            "function_declaration" | "generator_function_declaration" | "method_definition" => {
                node.child_by_field_name("body")?;
                Some(node.child_by_field_name("name").map(text).unwrap_or_default())
            }
            "lexical_declaration" | "variable_declaration" => {
                let mut cursor = node.walk();
                let declarators: Vec<_> = node
                    .named_children(&mut cursor)
                    .filter(|c| c.kind() == "variable_declarator")
                    .collect();
                let [decl] = declarators.as_slice() else {
                    return None;
                };
                let value = decl.child_by_field_name("value")?;
                matches!(value.kind(), "arrow_function" | "function_expression" | "function")
                    .then(|| decl.child_by_field_name("name").map(text).unwrap_or_default())
            }
            "public_field_definition" => {
                let value = node.child_by_field_name("value")?;
                matches!(value.kind(), "arrow_function" | "function_expression" | "function")
                    .then(|| node.child_by_field_name("name").map(text).unwrap_or_default())
            }
            _ => None,
        },
        SourceLanguage::Java => match node.kind() {
            "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
                node.child_by_field_name("body")?;
                Some(node.child_by_field_name("name").map(text).unwrap_or_default())
            }
            _ => None,
        },
        SourceLanguage::Cpp => {
            if node.kind() != "function_definition" {
                return None;
            }
            node.child_by_field_name("body")?;
            let mut declarator = node.child_by_field_name("declarator");
            while let Some(d) = declarator {
                if d.kind() == "function_declarator" {
                    return Some(d.child_by_field_name("declarator").map(text).unwrap_or_default());
                }
                // reference_declarator keeps its inner declarator unnamed
                declarator = d
                    .child_by_field_name("declarator")
                    .or_else(|| d.named_child(d.named_child_count().checked_sub(1)? as u32));
            }
            Some(String::new())
        }
        SourceLanguage::Python => None,
    }
}

/// Wrapping constructs that belong to the function for association purposes.
fn anchor_of(node: Node<'_>, language: SourceLanguage) -> Node<'_> {
    let mut anchor = node;
    while let Some(parent) = anchor.parent() {
        let lift = match language {
            SourceLanguage::TypeScript => parent.kind() == "export_statement",
            SourceLanguage::Cpp => parent.kind() == "template_declaration",
            _ => false,
        };
        if !lift {
            break;
        }
        anchor = parent;
    }
    anchor
}

fn is_comment(node: Node<'_>) -> bool {
    matches!(node.kind(), "comment" | "block_comment" | "line_comment")
}

fn pair_for(func: Node<'_>, function_name: String, source: &str, language: SourceLanguage) -> Option<RawPair> {
    let anchor = anchor_of(func, language);
    let mut code_start = anchor.start_byte();
    let mut prev = anchor.prev_sibling();
    while let Some(p) = prev {
        if p.kind() != "decorator" {
            break;
        }
        code_start = p.start_byte();
        prev = p.prev_sibling();
    }
    let comment = prev.filter(|p| is_comment(*p))?;
    if !source[comment.end_byte()..code_start].trim().is_empty() {
        return None;
    }
    let comment_text = &source[comment.byte_range()];
    let (doc_span, doc_text) = if is_block_doc(comment_text) {
        let span = (comment.start_byte(), comment.end_byte());
        (span, clean_block_comment(comment_text))
    } else if language == SourceLanguage::Cpp && is_line_doc(comment_text) {
        let mut first = comment;
        while let Some(p) = first.prev_sibling() {
            if !is_comment(p) || !is_line_doc(&source[p.byte_range()]) {
                break;
            }
            let gap = &source[p.end_byte()..first.start_byte()];
            if !gap.trim().is_empty() || gap.matches('\n').count() > 1 {
                break;
            }
            first = p;
        }
        let span = (first.start_byte(), comment.end_byte());
        (span, clean_line_comments(&source[span.0..span.1]))
    } else {
        return None;
    };

    let code_span = (code_start, anchor.end_byte());
    let code_text = source[code_span.0..code_span.1].to_string();
    if doc_text.is_empty() || code_text.trim().is_empty() {
        return None;
    }
    Some(RawPair {
        function_name,
        doc_text,
        code_text,
        doc_span,
        code_span,
    })
}
