//! Token scanner for the supported Verilog subset.
//!
//! Tokens carry byte spans into the source so expression text (connection
//! arguments, parameter defaults, range bounds) can be copied verbatim
//! instead of being reconstructed from parsed pieces.

use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    /// Identifier or keyword; keyword-ness is decided by the parser.
    Ident,
    /// Numeric literal, including based forms like `4'b1010` and `'d8`.
    Number,
    /// String literal, quotes included in the span.
    Str,
    /// Any single punctuation or operator character.
    Punct(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub span: Range<usize>,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.span.clone()]
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

fn is_base_marker(c: char) -> bool {
    matches!(c, 'b' | 'B' | 'o' | 'O' | 'd' | 'D' | 'h' | 'H')
}

/// Character cursor that tracks byte offsets, so spans always land on UTF-8
/// boundaries even for bytes outside the Verilog character set.
struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    len: usize,
    pos: usize,
    _source: std::marker::PhantomData<&'a str>,
}

impl<'a> Cursor<'a> {
    fn new(source: &'a str) -> Self {
        Cursor {
            chars: source.char_indices().collect(),
            len: source.len(),
            pos: 0,
            _source: std::marker::PhantomData,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(off, _)| off)
            .unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
    }
}

/// Splits purified source into tokens. Never fails: unrecognized characters
/// become single-character punctuation tokens.
pub fn tokenize(source: &str) -> Vec<Token> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let start = cur.offset();

        let kind = if is_ident_start(c) {
            cur.bump();
            cur.eat_while(is_ident_continue);
            TokKind::Ident
        } else if c == '\\' {
            // Escaped identifier: backslash up to the next whitespace.
            cur.bump();
            cur.eat_while(|c| !c.is_whitespace());
            TokKind::Ident
        } else if c == '$' && cur.peek_at(1).is_some_and(is_ident_start) {
            cur.bump();
            cur.eat_while(is_ident_continue);
            TokKind::Ident
        } else if c.is_ascii_digit() || (c == '\'' && cur.peek_at(1).is_some_and(is_based_body_start)) {
            scan_number(&mut cur);
            TokKind::Number
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.bump() {
                    Some('\\') => {
                        cur.bump();
                    }
                    Some('"') | None => break,
                    Some(_) => {}
                }
            }
            TokKind::Str
        } else {
            cur.bump();
            TokKind::Punct(c)
        };

        tokens.push(Token {
            kind,
            span: start..cur.offset(),
        });
    }
    tokens
}

fn is_based_body_start(c: char) -> bool {
    is_base_marker(c) || matches!(c, 's' | 'S') || c.is_ascii_digit()
}

/// Consumes a numeric literal: `12`, `1_000`, `1.5`, `4'b10_10`, `'hFF`,
/// `3'sd2`. A size and base separated by whitespace become two tokens, which
/// the width evaluator tolerates.
fn scan_number(cur: &mut Cursor<'_>) {
    cur.eat_while(|c| c.is_ascii_digit() || c == '_');
    match cur.peek() {
        Some('\'') => {
            cur.bump();
            if cur.peek().is_some_and(|c| matches!(c, 's' | 'S')) {
                cur.bump();
            }
            if cur.peek().is_some_and(is_base_marker) {
                cur.bump();
            }
            cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '?');
        }
        Some('.') if cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
            cur.bump();
            cur.eat_while(|c| c.is_ascii_digit() || c == '_');
        }
        _ => {}
    }
}
