//! Verilog ingestion: purification, structural extraction, and the
//! corpus-level filters used when preparing training pairs and retrieval
//! entries.
//!
//! The parser here covers a deliberately narrow slice of Verilog: module
//! headers (both header-declared and body-declared port styles), parameter
//! declarations, and module instantiations. That is the structural skeleton
//! the design summaries need. Everything else in a module body is scanned
//! only for block nesting, and constructs outside the subset are collected
//! as notes instead of failing the file.

mod const_eval;
mod corpus;
mod lexer;
mod parser;
mod purify;
mod to_gir;

pub use const_eval::eval_const_expr;
pub use corpus::{load_corpus, CorpusFile, CorpusNote};
pub use parser::{extract_modules, ExtractError};
pub use purify::{purify_source, PurifyError};
pub use to_gir::{to_gir, ToGirError};

use std::ops::Range;

use sha2::{Digest, Sha256};

use crate::gir::{BitSpec, NetType, PortDirection};

/// Verilog source with comments and compile directives removed, paired with
/// a fingerprint of the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurifiedSource {
    pub text: String,
    pub original_hash: String,
}

/// Purifies raw source and records the pre-purification fingerprint.
pub fn purify(source: &str) -> Result<PurifiedSource, PurifyError> {
    Ok(PurifiedSource {
        text: purify_source(source)?,
        original_hash: fingerprint_text(source),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    /// Default value expression, verbatim. Empty when none was given.
    pub default_text: String,
    /// True for `localparam`: used for width evaluation but not part of the
    /// module's public parameter set.
    pub local: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub direction: PortDirection,
    pub net_type: NetType,
    pub bits: BitSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connection {
    Named { port: String, expr: String },
    Positional { index: usize, expr: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub module_type: String,
    pub instance_name: String,
    /// Parameter overrides from `#(...)`: (name, value text). Positional
    /// overrides get `$pos<i>` placeholder names.
    pub param_overrides: Vec<(String, String)>,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerilogModuleDecl {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub ports: Vec<PortDecl>,
    pub instantiations: Vec<Instantiation>,
    /// Byte range of the whole `module ... endmodule` region in the purified
    /// source, usable for isolating single-module snippets.
    pub source_span: Range<usize>,
}

impl VerilogModuleDecl {
    /// Public (non-local) parameters in declaration order.
    pub fn public_params(&self) -> impl Iterator<Item = &ParamDecl> {
        self.params.iter().filter(|p| !p.local)
    }
}

/// A construct the parser saw but does not model. Collected, never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetNote {
    pub construct: String,
    pub reason: String,
}

/// Content fingerprint: SHA-256 of the text with whitespace runs collapsed
/// to single spaces. Callers hash purified text so comment and layout
/// changes never produce a new identity.
pub fn fingerprint_text(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let digest = Sha256::digest(collapsed.as_bytes());
    hex::encode(digest)
}

/// Fingerprint of raw source: purify first, fall back to the raw text when
/// purification fails (so deduplication never aborts a whole corpus).
pub fn fingerprint_source(source: &str) -> String {
    match purify_source(source) {
        Ok(clean) => fingerprint_text(&clean),
        Err(_) => fingerprint_text(source),
    }
}

/// Keeps the first occurrence of each distinct fingerprint, preserving
/// input order.
pub fn dedupe(corpus: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    corpus
        .iter()
        .filter(|text| seen.insert(fingerprint_source(text)))
        .cloned()
        .collect()
}

/// Approximate token count: each maximal run of identifier-ish characters
/// (alphanumerics, `_`, `$`, `'`) counts as one token, and every other
/// non-whitespace character counts as one. This overcounts multi-character
/// operators slightly, which only makes the length filter more conservative.
pub fn token_length(text: &str) -> usize {
    let mut count = 0usize;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '\'') {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !c.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

/// Drops corpus entries whose approximate token count exceeds `max_tokens`.
pub fn token_length_filter(corpus: &[String], max_tokens: usize) -> Vec<String> {
    assert!(max_tokens >= 1, "max_tokens must be at least 1");
    corpus
        .iter()
        .filter(|text| token_length(text) <= max_tokens)
        .cloned()
        .collect()
}

/// Default token budget for corpus filtering.
pub const DEFAULT_MAX_TOKENS: usize = 4096;

/// Picks the root of the instantiation hierarchy: the first declaration no
/// other declaration instantiates, falling back to the first declaration.
pub fn infer_top(decls: &[VerilogModuleDecl]) -> Option<String> {
    let instantiated: std::collections::HashSet<&str> = decls
        .iter()
        .flat_map(|d| d.instantiations.iter().map(|i| i.module_type.as_str()))
        .collect();
    decls
        .iter()
        .find(|d| !instantiated.contains(d.name.as_str()))
        .or(decls.first())
        .map(|d| d.name.clone())
}

/// Longest root-to-leaf depth of the instantiation tree starting at `top`,
/// counting modules: a module with no submodule instances has depth 1.
/// Instance types without a matching declaration contribute depth 1 as
/// leaves. Cycles (which valid Verilog cannot have) are cut short.
pub fn hierarchy_depth(decls: &[VerilogModuleDecl], top: &str) -> usize {
    fn walk(
        decls: &[VerilogModuleDecl],
        name: &str,
        visiting: &mut Vec<String>,
    ) -> usize {
        if visiting.iter().any(|n| n == name) {
            return 0;
        }
        let Some(decl) = decls.iter().find(|d| d.name == name) else {
            return 1;
        };
        visiting.push(name.to_string());
        let deepest = decl
            .instantiations
            .iter()
            .map(|inst| walk(decls, &inst.module_type, visiting))
            .max()
            .unwrap_or(0);
        visiting.pop();
        1 + deepest
    }
    walk(decls, top, &mut Vec::new())
}
