//! Core library for the girforge toolkit.
//!
//! The pieces fit together as a two-stage generation pipeline: a natural
//! language request is first turned into a hierarchical design summary
//! ([`gir`]), which is validated, rendered into alignment text ([`align`]),
//! enriched with retrieved reference designs ([`retrieval`]), and finally
//! expanded into Verilog by a second model call ([`pipeline`]). Candidate
//! outputs are checked by compiling and simulating them against golden
//! references ([`eval`]). [`extract`] builds design summaries directly from
//! existing Verilog so a reference corpus needs no hand annotation.

pub mod align;
pub mod extract;
pub mod gir;
pub mod ident;
pub mod eval;
pub mod llm;
pub mod pipeline;
pub mod retrieval;

#[cfg(test)]
pub(crate) mod testutil;
