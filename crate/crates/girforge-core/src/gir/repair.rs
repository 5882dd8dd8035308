//! Cleanup of almost-JSON model replies.
//!
//! Model output often wraps the JSON payload in prose or code fences, uses
//! single quotes, or leaves trailing commas. [`repair_gir`] extracts the
//! payload and normalizes those artifacts so a second parse attempt can
//! succeed. It does not try to fix structural damage such as missing braces.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("no JSON object found in the reply")]
    NoJsonFound,
}

/// Extracts and cleans the first JSON object span found in `text`.
///
/// Preference goes to the first fenced code block containing a brace, then
/// to the text as a whole. The returned string is the brace-balanced span
/// with single-quoted strings rewritten to double-quoted and trailing commas
/// removed. The result still needs parsing; repair only normalizes surface
/// syntax.
pub fn repair_gir(text: &str) -> Result<String, RepairError> {
    let candidate = fenced_block(text).unwrap_or(text);
    let span = balanced_object_span(candidate)
        .or_else(|| balanced_object_span(text))
        .ok_or(RepairError::NoJsonFound)?;
    let requoted = normalize_quotes(span);
    Ok(strip_trailing_commas(&requoted))
}

/// Returns the body of the first ``` fence that contains a `{`, if any.
fn fenced_block(text: &str) -> Option<&str> {
    let mut rest = text;
    loop {
        let open = rest.find("```")?;
        let after_open = &rest[open + 3..];
        // Skip the info string ("json", "javascript", ...) up to end of line.
        let body_start = after_open.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after_open[body_start..];
        match body.find("```") {
            Some(close) => {
                let block = &body[..close];
                if block.contains('{') {
                    return Some(block);
                }
                rest = &body[close + 3..];
            }
            None => return body.contains('{').then_some(body),
        }
    }
}

/// Finds the first `{ ... }` span whose braces balance, honoring both quote
/// styles so braces inside string values do not count.
fn balanced_object_span(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut quote: Option<u8> = None;
    let mut escaped = false;

    for (offset, &b) in bytes[start..].iter().enumerate() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == q {
                quote = None;
            }
            continue;
        }
        match b {
            b'"' | b'\'' => quote = Some(b),
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + offset + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Rewrites single-quoted strings as double-quoted, escaping embedded double
/// quotes and unescaping `\'`. Apostrophes inside double-quoted strings are
/// left alone.
fn normalize_quotes(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut in_double = false;
    let mut escaped = false;

    while let Some(c) = chars.next() {
        if in_double {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_double = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_double = true;
                out.push(c);
            }
            '\'' => {
                out.push('"');
                let mut inner_escaped = false;
                for inner in chars.by_ref() {
                    if inner_escaped {
                        if inner == '\'' {
                            out.push('\'');
                        } else {
                            out.push('\\');
                            out.push(inner);
                        }
                        inner_escaped = false;
                    } else if inner == '\\' {
                        inner_escaped = true;
                    } else if inner == '\'' {
                        break;
                    } else if inner == '"' {
                        out.push_str("\\\"");
                    } else {
                        out.push(inner);
                    }
                }
                out.push('"');
            }
            _ => out.push(c),
        }
    }
    out
}

/// Drops commas that directly precede a closing brace or bracket.
fn strip_trailing_commas(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let chars: Vec<char> = text.chars().collect();

    for (idx, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[idx + 1..].iter().find(|ch| !ch.is_whitespace());
                if !matches!(next, Some('}') | Some(']')) {
                    out.push(c);
                }
            }
            _ => out.push(c),
        }
    }
    out
}
