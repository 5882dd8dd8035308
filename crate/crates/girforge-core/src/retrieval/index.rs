//! Index construction, persistence, and coarse retrieval.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embed::{cosine_sim, EmbedError};
use super::{CodeEntry, Embedder, RetrieveError, ScoredCandidate, SemanticVector};
use crate::extract::{
    extract_modules, fingerprint_text, load_corpus, purify_source, CorpusNote,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("corpus produced no usable entries")]
    EmptyCorpus { notes: Vec<CorpusNote> },
    #[error("index file is malformed: {reason}")]
    Format { reason: String },
    #[error("index was built with embedder {expected:?} but {got:?} was supplied")]
    EmbedderMismatch { expected: String, got: String },
    #[error("description for snippet {fingerprint} cannot be embedded: {source}")]
    Embed {
        fingerprint: String,
        source: EmbedError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable snippet index: vectors for scanning plus a fingerprint-keyed
/// store, both sorted by fingerprint so persistence is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    pub embedder_id: String,
    pub dimension: usize,
    entries: Vec<(String, SemanticVector)>,
    store: BTreeMap<String, CodeEntry>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    embedder_id: String,
    dimension: usize,
    entry_count: usize,
}

#[derive(Serialize, Deserialize)]
struct PersistedEntry {
    fingerprint: String,
    description: String,
    code: String,
    vector: Vec<f64>,
}

impl RetrievalIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, fingerprint: &str) -> Option<&CodeEntry> {
        self.store.get(fingerprint)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CodeEntry> {
        self.store.values()
    }

    /// Writes the index as JSON lines: one header line, then one line per
    /// entry in fingerprint order. Building from the same corpus always
    /// produces byte-identical files.
    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut out = Vec::new();
        let header = Header {
            format_version: FORMAT_VERSION,
            embedder_id: self.embedder_id.clone(),
            dimension: self.dimension,
            entry_count: self.entries.len(),
        };
        writeln!(out, "{}", serde_json::to_string(&header).unwrap())?;
        for (fingerprint, vector) in &self.entries {
            let entry = &self.store[fingerprint];
            let persisted = PersistedEntry {
                fingerprint: fingerprint.clone(),
                description: entry.description.clone(),
                code: entry.code.clone(),
                vector: vector.values.clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&persisted).unwrap())?;
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Builds an index from (purified code, description) pairs. Duplicate
/// fingerprints keep their first occurrence.
pub fn build_index(
    pairs: Vec<(String, String)>,
    embedder: &dyn Embedder,
) -> Result<RetrievalIndex, IndexError> {
    let mut store: BTreeMap<String, CodeEntry> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (code, description) in pairs {
        let fingerprint = fingerprint_text(&code);
        if store.contains_key(&fingerprint) {
            continue;
        }
        order.push(fingerprint.clone());
        store.insert(
            fingerprint.clone(),
            CodeEntry {
                fingerprint,
                code,
                description,
            },
        );
    }
    if store.is_empty() {
        return Err(IndexError::EmptyCorpus { notes: vec![] });
    }

    let fingerprints: Vec<String> = store.keys().cloned().collect();
    let descriptions: Vec<String> = fingerprints
        .iter()
        .map(|f| store[f].description.clone())
        .collect();
    let vectors = embedder.embed(&descriptions).map_err(|source| {
        // Identify the failing description for the error message.
        for (f, d) in fingerprints.iter().zip(&descriptions) {
            if embedder.embed(std::slice::from_ref(d)).is_err() {
                return IndexError::Embed {
                    fingerprint: f.clone(),
                    source,
                };
            }
        }
        IndexError::Embed {
            fingerprint: "<unknown>".to_string(),
            source,
        }
    })?;

    Ok(RetrievalIndex {
        embedder_id: embedder.id(),
        dimension: embedder.dimension(),
        entries: fingerprints.into_iter().zip(vectors).collect(),
        store,
    })
}

/// Builds an index from a corpus directory of `<name>.v` files with
/// `<name>.desc.txt` sidecar descriptions.
///
/// Files are skipped (with a note) when purification fails or they do not
/// contain exactly one module. A missing or token-free sidecar is replaced
/// by the module's header skeleton, flagged with a note.
pub fn build_index_from_dir(
    dir: &Path,
    embedder: &dyn Embedder,
) -> Result<(RetrievalIndex, Vec<CorpusNote>), IndexError> {
    let files = load_corpus(&[dir.to_path_buf()])?;
    let mut notes = Vec::new();
    let mut pairs = Vec::new();

    for file in &files {
        let name = file.path.display().to_string();
        let purified = match purify_source(&file.source) {
            Ok(text) => text,
            Err(e) => {
                notes.push(CorpusNote {
                    file: name,
                    construct: "purify".to_string(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let decls = match extract_modules(&purified) {
            Ok((decls, sub_notes)) => {
                for n in sub_notes {
                    notes.push(CorpusNote {
                        file: name.clone(),
                        construct: n.construct,
                        reason: n.reason,
                    });
                }
                decls
            }
            Err(e) => {
                notes.push(CorpusNote {
                    file: name,
                    construct: "extract".to_string(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if decls.len() != 1 {
            notes.push(CorpusNote {
                file: name,
                construct: "module count".to_string(),
                reason: format!("{} modules in file; retrieval wants exactly 1", decls.len()),
            });
            continue;
        }
        let code = purified[decls[0].source_span.clone()].to_string();

        let sidecar = file.path.with_extension("desc.txt");
        let description = match std::fs::read_to_string(&sidecar) {
            Ok(text) if !super::embedding_tokens(&text).is_empty() => text.trim().to_string(),
            Ok(_) => {
                let synthesized = header_skeleton(&code);
                notes.push(CorpusNote {
                    file: name,
                    construct: "description".to_string(),
                    reason: "sidecar description has no tokens; using header skeleton".to_string(),
                });
                synthesized
            }
            Err(_) => {
                let synthesized = header_skeleton(&code);
                notes.push(CorpusNote {
                    file: name,
                    construct: "description".to_string(),
                    reason: "no .desc.txt sidecar; using header skeleton".to_string(),
                });
                synthesized
            }
        };
        pairs.push((code, description));
    }

    if pairs.is_empty() {
        return Err(IndexError::EmptyCorpus { notes });
    }
    let index = build_index(pairs, embedder)?;
    Ok((index, notes))
}

/// First statement of the module, whitespace-collapsed: the fallback
/// description when no sidecar exists.
fn header_skeleton(code: &str) -> String {
    let upto = code.find(';').map(|i| i + 1).unwrap_or(code.len());
    code[..upto].split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Reads an index written by [`RetrievalIndex::save`].
pub fn load_index(path: &Path) -> Result<RetrievalIndex, IndexError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();

    let header_line = lines
        .next()
        .ok_or_else(|| IndexError::Format {
            reason: "file is empty".to_string(),
        })??;
    let header: Header = serde_json::from_str(&header_line).map_err(|e| IndexError::Format {
        reason: format!("bad header: {e}"),
    })?;
    if header.format_version != FORMAT_VERSION {
        return Err(IndexError::Format {
            reason: format!(
                "format version {} not supported (expected {})",
                header.format_version, FORMAT_VERSION
            ),
        });
    }

    let mut entries = Vec::with_capacity(header.entry_count);
    let mut store = BTreeMap::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let persisted: PersistedEntry =
            serde_json::from_str(&line).map_err(|e| IndexError::Format {
                reason: format!("bad entry: {e}"),
            })?;
        if persisted.vector.len() != header.dimension {
            return Err(IndexError::Format {
                reason: format!(
                    "entry {} has dimension {} (expected {})",
                    persisted.fingerprint,
                    persisted.vector.len(),
                    header.dimension
                ),
            });
        }
        if store.contains_key(&persisted.fingerprint) {
            return Err(IndexError::Format {
                reason: format!("duplicate fingerprint {}", persisted.fingerprint),
            });
        }
        entries.push((
            persisted.fingerprint.clone(),
            SemanticVector {
                values: persisted.vector,
            },
        ));
        store.insert(
            persisted.fingerprint.clone(),
            CodeEntry {
                fingerprint: persisted.fingerprint,
                code: persisted.code,
                description: persisted.description,
            },
        );
    }
    if entries.len() != header.entry_count {
        return Err(IndexError::Format {
            reason: format!(
                "header promises {} entries, file has {}",
                header.entry_count,
                entries.len()
            ),
        });
    }

    Ok(RetrievalIndex {
        embedder_id: header.embedder_id,
        dimension: header.dimension,
        entries,
        store,
    })
}

/// Top-k scan by cosine similarity, descending; ties broken by fingerprint
/// so rankings are reproducible.
pub fn retrieve_coarse(
    index: &RetrievalIndex,
    query_text: &str,
    embedder: &dyn Embedder,
    k: usize,
) -> Result<Vec<ScoredCandidate>, RetrieveError> {
    assert!(k >= 1, "k must be at least 1");
    if index.is_empty() {
        return Err(RetrieveError::EmptyIndex);
    }
    let query = embedder
        .embed(std::slice::from_ref(&query_text.to_string()))?
        .remove(0);

    let mut scored: Vec<(f64, &String)> = index
        .entries
        .iter()
        .map(|(fingerprint, vector)| {
            // Stored vectors are normalized and non-zero by construction, and
            // dimensions were checked at load; failures cannot happen here.
            let score = cosine_sim(&query, vector).expect("index vectors are valid");
            (score, fingerprint)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));

    Ok(scored
        .into_iter()
        .take(k)
        .map(|(score, fingerprint)| ScoredCandidate {
            entry: index.store[fingerprint].clone(),
            coarse_score: score,
            rerank_score: score,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::HashedBowEmbedder;
    use super::*;

    fn pairs(n: usize) -> Vec<(String, String)> {
        (0..n)
            .map(|i| {
                (
                    format!("module m{i}(input a, output z); endmodule"),
                    format!("synthetic module number {i} doing task {i}"),
                )
            })
            .collect()
    }

    #[test]
    fn build_dedupes_and_counts() {
        let embedder = HashedBowEmbedder::default();
        let mut input = pairs(3);
        input.push(input[0].clone());
        let index = build_index(input, &embedder).unwrap();
        assert_eq!(index.len(), 3);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let embedder = HashedBowEmbedder::default();
        assert!(matches!(
            build_index(vec![], &embedder),
            Err(IndexError::EmptyCorpus { .. })
        ));
    }

    #[test]
    fn save_load_roundtrip_and_byte_stability() {
        let embedder = HashedBowEmbedder::default();
        let index = build_index(pairs(5), &embedder).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.idx");
        let path_b = dir.path().join("b.idx");
        index.save(&path_a).unwrap();
        let loaded = load_index(&path_a).unwrap();
        assert_eq!(loaded, index);
        // A rebuild from the same inputs persists identically.
        build_index(pairs(5), &embedder)
            .unwrap()
            .save(&path_b)
            .unwrap();
        assert_eq!(
            std::fs::read(&path_a).unwrap(),
            std::fs::read(&path_b).unwrap()
        );
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.idx");

        std::fs::write(&path, "").unwrap();
        assert!(matches!(load_index(&path), Err(IndexError::Format { .. })));

        std::fs::write(&path, "not json\n").unwrap();
        assert!(matches!(load_index(&path), Err(IndexError::Format { .. })));

        let embedder = HashedBowEmbedder::default();
        let index = build_index(pairs(2), &embedder).unwrap();
        index.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(2).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(matches!(load_index(&path), Err(IndexError::Format { .. })));
    }

    #[test]
    fn self_retrieval_scores_one() {
        let embedder = HashedBowEmbedder::default();
        let input = pairs(10);
        let query = input[4].1.clone();
        let index = build_index(input, &embedder).unwrap();
        let hits = retrieve_coarse(&index, &query, &embedder, 3).unwrap();
        assert_eq!(hits.len(), 3);
        assert!((hits[0].coarse_score - 1.0).abs() < 1e-9);
        assert_eq!(hits[0].entry.description, query);
        assert!(hits[0].coarse_score >= hits[1].coarse_score);
        assert!(hits[1].coarse_score >= hits[2].coarse_score);
    }

    #[test]
    fn directory_ingestion_with_sidecars_and_skips() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("one.v"),
            "module one(input a, output z); assign z = a; endmodule\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("one.desc.txt"), "a passthrough buffer\n").unwrap();
        std::fs::write(
            dir.path().join("two.v"),
            "module two(input a, output z); assign z = ~a; endmodule\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("both.v"),
            "module x(input a); endmodule\nmodule y(input b); endmodule\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("none.v"), "// just a comment\n").unwrap();

        let embedder = HashedBowEmbedder::default();
        let (index, notes) = build_index_from_dir(dir.path(), &embedder).unwrap();
        assert_eq!(index.len(), 2);
        assert!(notes.iter().any(|n| n.construct == "module count"));
        assert!(notes.iter().any(|n| n.construct == "extract"));
        // two.v has no sidecar: description synthesized from the header.
        assert!(notes.iter().any(|n| n.construct == "description"));
        let synth = index
            .entries()
            .find(|e| e.code.contains("module two"))
            .unwrap();
        assert_eq!(synth.description, "module two(input a, output z);");
    }

    #[test]
    fn wrong_embedder_vectors_still_load_by_id() {
        // The id check is the caller's job (query paths verify it); loading
        // only validates structure.
        let embedder = HashedBowEmbedder { dimension: 16 };
        let index = build_index(pairs(2), &embedder).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx");
        index.save(&path).unwrap();
        let loaded = load_index(&path).unwrap();
        assert_eq!(loaded.embedder_id, "hashed-bow-fnv1a64-d16");
        assert_eq!(loaded.dimension, 16);
    }
}
