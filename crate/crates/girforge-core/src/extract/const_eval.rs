//! Constant folding for width and parameter expressions.
//!
//! Port ranges like `[WIDTH-1:0]` must become concrete numbers in the design
//! summary, so this evaluator folds integer expressions over the module's
//! parameter defaults. It covers the arithmetic that appears in realistic
//! width expressions: literals (plain and based), parameter references,
//! `+ - * / % **`, shifts, comparisons, boolean combinators, ternaries, and
//! `$clog2`. Anything else yields `None` and the caller records a note.

use std::collections::HashMap;

use super::lexer::{tokenize, TokKind, Token};

/// Evaluates `expr` against parameter defaults in `env` (name → default
/// expression text). Parameter references are resolved recursively with a
/// cycle guard. Returns `None` for anything outside the supported grammar,
/// on division by zero, or on overflow.
pub fn eval_const_expr(expr: &str, env: &HashMap<String, String>) -> Option<i64> {
    let mut active = Vec::new();
    eval_with_guard(expr, env, &mut active)
}

fn eval_with_guard(
    expr: &str,
    env: &HashMap<String, String>,
    active: &mut Vec<String>,
) -> Option<i64> {
    let tokens = tokenize(expr);
    let mut p = ExprParser {
        src: expr,
        tokens: &tokens,
        pos: 0,
        env,
        active,
    };
    let value = p.ternary()?;
    if p.pos != p.tokens.len() {
        return None;
    }
    Some(value)
}

struct ExprParser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    pos: usize,
    env: &'a HashMap<String, String>,
    active: &'a mut Vec<String>,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokKind::Punct(c))
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek_punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Two-character operator lookahead over single-char punct tokens.
    fn eat_punct2(&mut self, a: char, b: char) -> bool {
        if self.peek_punct(a)
            && matches!(self.tokens.get(self.pos + 1), Some(t) if t.kind == TokKind::Punct(b))
        {
            self.pos += 2;
            true
        } else {
            false
        }
    }

    fn ternary(&mut self) -> Option<i64> {
        let cond = self.logic_or()?;
        if self.eat_punct('?') {
            let then = self.ternary()?;
            if !self.eat_punct(':') {
                return None;
            }
            let other = self.ternary()?;
            Some(if cond != 0 { then } else { other })
        } else {
            Some(cond)
        }
    }

    fn logic_or(&mut self) -> Option<i64> {
        let mut lhs = self.logic_and()?;
        while self.eat_punct2('|', '|') {
            let rhs = self.logic_and()?;
            lhs = i64::from(lhs != 0 || rhs != 0);
        }
        Some(lhs)
    }

    fn logic_and(&mut self) -> Option<i64> {
        let mut lhs = self.compare()?;
        while self.eat_punct2('&', '&') {
            let rhs = self.compare()?;
            lhs = i64::from(lhs != 0 && rhs != 0);
        }
        Some(lhs)
    }

    fn compare(&mut self) -> Option<i64> {
        let lhs = self.shift()?;
        let value = if self.eat_punct2('=', '=') {
            i64::from(lhs == self.shift()?)
        } else if self.eat_punct2('!', '=') {
            i64::from(lhs != self.shift()?)
        } else if self.eat_punct2('<', '=') {
            i64::from(lhs <= self.shift()?)
        } else if self.eat_punct2('>', '=') {
            i64::from(lhs >= self.shift()?)
        } else if self.peek_punct('<') && !self.peek2_is('<') {
            self.pos += 1;
            i64::from(lhs < self.shift()?)
        } else if self.peek_punct('>') && !self.peek2_is('>') {
            self.pos += 1;
            i64::from(lhs > self.shift()?)
        } else {
            lhs
        };
        Some(value)
    }

    fn peek2_is(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos + 1), Some(t) if t.kind == TokKind::Punct(c))
    }

    fn shift(&mut self) -> Option<i64> {
        let mut lhs = self.additive()?;
        loop {
            if self.eat_punct2('<', '<') {
                let rhs = self.additive()?;
                lhs = lhs.checked_shl(u32::try_from(rhs).ok()?)?;
            } else if self.eat_punct2('>', '>') {
                let rhs = self.additive()?;
                lhs = lhs.checked_shr(u32::try_from(rhs).ok()?)?;
            } else {
                return Some(lhs);
            }
        }
    }

    fn additive(&mut self) -> Option<i64> {
        let mut lhs = self.multiplicative()?;
        loop {
            if self.eat_punct('+') {
                lhs = lhs.checked_add(self.multiplicative()?)?;
            } else if self.eat_punct('-') {
                lhs = lhs.checked_sub(self.multiplicative()?)?;
            } else {
                return Some(lhs);
            }
        }
    }

    fn multiplicative(&mut self) -> Option<i64> {
        let mut lhs = self.power()?;
        loop {
            if self.peek_punct('*') && !self.peek2_is('*') {
                self.pos += 1;
                lhs = lhs.checked_mul(self.power()?)?;
            } else if self.eat_punct('/') {
                let rhs = self.power()?;
                lhs = lhs.checked_div(rhs)?;
            } else if self.eat_punct('%') {
                let rhs = self.power()?;
                lhs = lhs.checked_rem(rhs)?;
            } else {
                return Some(lhs);
            }
        }
    }

    fn power(&mut self) -> Option<i64> {
        let base = self.unary()?;
        if self.eat_punct2('*', '*') {
            // Right associative.
            let exp = self.power()?;
            base.checked_pow(u32::try_from(exp).ok()?)
        } else {
            Some(base)
        }
    }

    fn unary(&mut self) -> Option<i64> {
        if self.eat_punct('-') {
            self.unary()?.checked_neg()
        } else if self.eat_punct('+') {
            self.unary()
        } else if self.eat_punct('!') {
            Some(i64::from(self.unary()? == 0))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Option<i64> {
        let token = self.peek()?.clone();
        match token.kind {
            TokKind::Punct('(') => {
                self.pos += 1;
                let value = self.ternary()?;
                if !self.eat_punct(')') {
                    return None;
                }
                Some(value)
            }
            TokKind::Number => {
                self.pos += 1;
                parse_verilog_literal(token.text(self.src))
            }
            TokKind::Ident => {
                let name = token.text(self.src);
                if name == "$clog2" {
                    self.pos += 1;
                    if !self.eat_punct('(') {
                        return None;
                    }
                    let arg = self.ternary()?;
                    if !self.eat_punct(')') {
                        return None;
                    }
                    return Some(clog2(arg)?);
                }
                self.pos += 1;
                if self.active.iter().any(|n| n == name) {
                    return None;
                }
                let default = self.env.get(name)?.clone();
                self.active.push(name.to_string());
                let value = eval_with_guard(&default, self.env, self.active);
                self.active.pop();
                value
            }
            _ => None,
        }
    }
}

/// Ceiling log2 as Verilog defines it: $clog2(0) = 0, $clog2(1) = 0,
/// $clog2(n) = bits needed to index n items.
fn clog2(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    if n <= 1 {
        return Some(0);
    }
    Some(64 - i64::from((n - 1).leading_zeros()) as i64)
}

/// Parses `42`, `1_000`, `4'd12`, `8'hFF`, `'b101`, `3'sd2`. Based literals
/// with x/z/? digits are rejected.
fn parse_verilog_literal(text: &str) -> Option<i64> {
    let cleaned: String = text.chars().filter(|&c| c != '_').collect();
    match cleaned.find('\'') {
        None => cleaned.parse().ok(),
        Some(tick) => {
            let mut body = &cleaned[tick + 1..];
            body = body.strip_prefix(['s', 'S']).unwrap_or(body);
            let (radix, digits) = match body.chars().next()? {
                'b' | 'B' => (2, &body[1..]),
                'o' | 'O' => (8, &body[1..]),
                'd' | 'D' => (10, &body[1..]),
                'h' | 'H' => (16, &body[1..]),
                _ => (10, body),
            };
            i64::from_str_radix(digits, radix).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn literals() {
        let e = env(&[]);
        assert_eq!(eval_const_expr("42", &e), Some(42));
        assert_eq!(eval_const_expr("4'd12", &e), Some(12));
        assert_eq!(eval_const_expr("8'hFF", &e), Some(255));
        assert_eq!(eval_const_expr("'b101", &e), Some(5));
        assert_eq!(eval_const_expr("1_000", &e), Some(1000));
        assert_eq!(eval_const_expr("4'bxx10", &e), None);
    }

    #[test]
    fn arithmetic_and_precedence() {
        let e = env(&[]);
        assert_eq!(eval_const_expr("2 + 3 * 4", &e), Some(14));
        assert_eq!(eval_const_expr("(2 + 3) * 4", &e), Some(20));
        assert_eq!(eval_const_expr("1 << 4", &e), Some(16));
        assert_eq!(eval_const_expr("2 ** 10", &e), Some(1024));
        assert_eq!(eval_const_expr("7 / 2", &e), Some(3));
        assert_eq!(eval_const_expr("7 % 2", &e), Some(1));
        assert_eq!(eval_const_expr("-3 + 5", &e), Some(2));
        assert_eq!(eval_const_expr("1 / 0", &e), None);
    }

    #[test]
    fn parameters_resolve_recursively() {
        let e = env(&[("WIDTH", "8"), ("HALF", "WIDTH/2"), ("W2", "HALF*4")]);
        assert_eq!(eval_const_expr("WIDTH-1", &e), Some(7));
        assert_eq!(eval_const_expr("W2", &e), Some(16));
        assert_eq!(eval_const_expr("MISSING", &e), None);
    }

    #[test]
    fn cyclic_parameters_fail_cleanly() {
        let e = env(&[("A", "B"), ("B", "A")]);
        assert_eq!(eval_const_expr("A", &e), None);
    }

    #[test]
    fn ternary_and_comparisons() {
        let e = env(&[("W", "16")]);
        assert_eq!(eval_const_expr("W > 8 ? 7 : 3", &e), Some(7));
        assert_eq!(eval_const_expr("W == 16 && 1", &e), Some(1));
        assert_eq!(eval_const_expr("W < 8 || 0", &e), Some(0));
        assert_eq!(eval_const_expr("!0", &e), Some(1));
    }

    #[test]
    fn clog2_matches_definition() {
        let e = env(&[]);
        for (n, want) in [(0, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (256, 8), (257, 9)] {
            assert_eq!(eval_const_expr(&format!("$clog2({n})"), &e), Some(want), "n={n}");
        }
    }

    #[test]
    fn garbage_is_none() {
        let e = env(&[]);
        assert_eq!(eval_const_expr("", &e), None);
        assert_eq!(eval_const_expr("a[3]", &e), None);
        assert_eq!(eval_const_expr("1 +", &e), None);
        assert_eq!(eval_const_expr("(1", &e), None);
    }
}
