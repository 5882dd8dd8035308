//! Corpus file discovery and loading.

use std::io;
use std::path::{Path, PathBuf};

/// One source file, read with lossy UTF-8 conversion so stray bytes in wild
/// code never abort ingestion.
#[derive(Debug, Clone)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub source: String,
}

/// A per-file ingestion note, written to the notes sidecar as JSON lines.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CorpusNote {
    pub file: String,
    pub construct: String,
    pub reason: String,
}

/// Collects Verilog sources from the given paths. Directories are walked
/// recursively for `.v` and `.sv` files; explicitly named files are loaded
/// regardless of extension. The result is sorted by path so downstream
/// artifacts do not depend on filesystem iteration order.
pub fn load_corpus(paths: &[PathBuf]) -> io::Result<Vec<CorpusFile>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            walk(path, &mut files)?;
        } else {
            files.push(load_file(path)?);
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

fn walk(dir: &Path, out: &mut Vec<CorpusFile>) -> io::Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            walk(&path, out)?;
        } else if matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("v") | Some("sv")
        ) {
            out.push(load_file(&path)?);
        }
    }
    Ok(())
}

fn load_file(path: &Path) -> io::Result<CorpusFile> {
    let bytes = std::fs::read(path)?;
    Ok(CorpusFile {
        path: path.to_path_buf(),
        source: String::from_utf8_lossy(&bytes).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walks_directories_and_filters_extensions() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("sub");
        std::fs::create_dir(&sub).unwrap();
        std::fs::write(dir.path().join("b.v"), "module b; endmodule").unwrap();
        std::fs::write(dir.path().join("a.sv"), "module a; endmodule").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "not verilog").unwrap();
        std::fs::write(sub.join("c.v"), "module c; endmodule").unwrap();

        let files = load_corpus(&[dir.path().to_path_buf()]).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|f| f.path.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.sv", "b.v", "c.v"]);
    }

    #[test]
    fn explicit_file_ignores_extension_filter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("design.verilog");
        std::fs::write(&path, "module d; endmodule").unwrap();
        let files = load_corpus(&[path]).unwrap();
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn invalid_utf8_is_replaced_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.v");
        std::fs::write(&path, b"module m; // caf\xe9\nendmodule\n").unwrap();
        let files = load_corpus(&[path]).unwrap();
        assert!(files[0].source.contains("module m;"));
    }
}
