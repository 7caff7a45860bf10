//! Grammar and dataset files.

use std::fs;
use std::io::Write;
use std::path::Path;

use gramevo_core::{parse_grammar, Dataset, Grammar};
use tempfile::NamedTempFile;

use crate::Error;

/// The expression grammar exactly as listed for the prime-counting
/// experiment (`np.sin(`, `x[:, 0]`, ...).
pub const PAPER_GRAMMAR: &str = include_str!("../../../grammars/pi_paper.bnf");

/// Same alternatives in the same order, with neutral tokens.
pub const CANONICAL_GRAMMAR: &str = include_str!("../../../grammars/pi_canonical.bnf");

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed write never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), Error> {
    write_atomic(path, dataset.to_text().as_bytes())
}

/// Reads a dataset file; the dataset is named after the file stem.
pub fn read_dataset(path: &Path) -> Result<Dataset, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::from_text(name, &text).map_err(|source| Error::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a grammar file. `builtin:paper` and `builtin:canonical` name the
/// bundled grammars.
pub fn load_grammar(spec: &Path) -> Result<Grammar, Error> {
    let text = match spec.to_str() {
        Some("builtin:paper") => PAPER_GRAMMAR.to_string(),
        Some("builtin:canonical") => CANONICAL_GRAMMAR.to_string(),
        _ => fs::read_to_string(spec).map_err(|e| Error::io(spec, e))?,
    };
    parse_grammar(&text).map_err(|source| Error::Grammar {
        path: spec.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gramevo_core::{build_dataset, sieve, DatasetError, DatasetMode};

    #[test]
    fn dataset_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pi.txt");
        let d = build_dataset(DatasetMode::PrimeIndexed, 1000, &sieve(8000).unwrap()).unwrap();
        write_dataset(&d, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x\ty\n2\t1\n3\t2\n"));
        assert!(text.ends_with("7919\t1000\n"));
        let back = read_dataset(&path).unwrap();
        assert_eq!(back.points(), d.points());
        assert_eq!(back.name(), "pi");
    }

    #[test]
    fn malformed_dataset_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "x y\nabc 1\n").unwrap();
        match read_dataset(&path) {
            Err(Error::Dataset {
                source: DatasetError::Format { line, .. },
                ..
            }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "x\ty\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Dataset { .. })));
        assert!(matches!(
            read_dataset(&dir.path().join("missing.txt")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn atomic_write_into_missing_directory_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope").join("out.txt");
        assert!(write_atomic(&path, b"data").is_err());
        assert!(!path.exists());
    }

    #[test]
    fn builtin_grammars() {
        let paper = load_grammar(Path::new("builtin:paper")).unwrap();
        let canon = load_grammar(Path::new("builtin:canonical")).unwrap();
        assert_eq!(paper.production_count("e").unwrap(), 11);
        assert_eq!(canon.production_count("c").unwrap(), 10);
        assert!(matches!(
            load_grammar(Path::new("/nonexistent/g.bnf")),
            Err(Error::Io { .. })
        ));
    }
}
