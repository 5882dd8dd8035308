//! Verilog identifier rules shared by the GIR validator and the extractor.

/// Returns true for a simple (non-escaped) Verilog identifier: a letter or
/// underscore followed by letters, digits, underscores, or `$`.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_typical_names() {
        for ok in ["clk", "_r", "a1$", "adder_16bit", "CLA4"] {
            assert!(is_valid_identifier(ok), "{ok}");
        }
    }

    #[test]
    fn rejects_bad_names() {
        for bad in ["", "1a", "$x", "a-b", "a b", "módulo"] {
            assert!(!is_valid_identifier(bad), "{bad:?}");
        }
    }
}
