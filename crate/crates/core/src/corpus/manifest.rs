//! Corpus manifest files: CSV with header `path,label,speaker`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{CorpusError, EmotionLabel, LabeledUtterance, Result};

const HEADER: [&str; 3] = ["path", "label", "speaker"];

/// Loads a manifest CSV.
///
/// The header row `path,label,speaker` is required. Clip paths stay exactly
/// as written (resolve them with [`LabeledUtterance::resolve`]). An empty
/// manifest (header only) is allowed and yields an empty list.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<LabeledUtterance>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| map_csv_open_error(e, path))?;

    let headers = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != HEADER {
        return Err(CorpusError::MissingHeader {
            path: path.to_path_buf(),
            found: found.join(","),
        });
    }

    let mut entries = Vec::new();
    let mut seen: HashSet<PathBuf> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |detail: String| CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line,
            detail,
        };
        if record.len() != 3 {
            return Err(malformed(format!("expected 3 fields, found {}", record.len())));
        }
        let clip = record[0].trim();
        if clip.is_empty() {
            return Err(malformed("empty clip path".to_string()));
        }
        let label: EmotionLabel =
            record[1]
                .parse()
                .map_err(|()| CorpusError::UnknownLabel {
                    path: path.to_path_buf(),
                    line,
                    label: record[1].trim().to_string(),
                })?;
        let speaker = record[2].trim();
        if speaker.is_empty() {
            return Err(malformed("empty speaker id".to_string()));
        }
        let clip_path = PathBuf::from(clip);
        if !seen.insert(clip_path.clone()) {
            return Err(CorpusError::DuplicatePath {
                path: path.to_path_buf(),
                line,
                clip: clip_path,
            });
        }
        entries.push(LabeledUtterance {
            clip_path,
            label,
            speaker_id: speaker.to_string(),
        });
    }
    Ok(entries)
}

/// Writes a manifest CSV with LF line endings.
pub fn save_manifest(path: impl AsRef<Path>, entries: &[LabeledUtterance]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| map_csv_open_error(e, path))?;
    writer
        .write_record(HEADER)
        .map_err(|e| csv_io(e, path))?;
    for entry in entries {
        let clip = entry.clip_path.to_string_lossy();
        writer
            .write_record([clip.as_ref(), entry.label.as_str(), &entry.speaker_id])
            .map_err(|e| csv_io(e, path))?;
    }
    writer.flush().map_err(io_err)
}

fn map_csv_open_error(e: csv::Error, path: &Path) -> CorpusError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            CorpusError::MissingFile(path.to_path_buf())
        }
        csv::ErrorKind::Io(io) => CorpusError::Io {
            path: path.to_path_buf(),
            source: io,
        },
        other => CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line: 0,
            detail: format!("{other:?}"),
        },
    }
}

fn csv_io(e: csv::Error, path: &Path) -> CorpusError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CorpusError::Io {
            path: path.to_path_buf(),
            source: io,
        },
        other => CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line: 0,
            detail: format!("{other:?}"),
        },
    }
}
