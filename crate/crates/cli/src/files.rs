//! Atomic writes and the versioned JSON-lines container shared by the
//! workload, fleet and trace files.

use std::fs;
use std::io::Write;
use std::path::Path;

use cutsched_core::cutplan::CutMode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// First line of every JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CutMode>,
}

impl Header {
    pub fn new(format: &str) -> Header {
        Header {
            format: format.to_string(),
            version: FORMAT_VERSION,
            mode: None,
        }
    }
}

/// Serialises a header line followed by one line per record.
pub fn to_jsonl<T: Serialize>(header: &Header, records: impl IntoIterator<Item = T>) -> String {
    let mut out = serde_json::to_string(header).expect("header serialises");
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(&r).expect("record serialises"));
        out.push('\n');
    }
    out
}

/// Parses a JSON-lines file of `format`, returning the header and each
/// record with its 1-based line number. Blank lines are skipped.
pub fn parse_jsonl<T: DeserializeOwned>(path: &Path, text: &str, format: &str) -> Result<(Header, Vec<(usize, T)>)> {
    let parse_err = |line: usize, msg: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((n, first)) = lines.next() else {
        return Err(parse_err(1, format!("empty file, expected a {format} header")));
    };
    let header: Header =
        serde_json::from_str(first).map_err(|e| parse_err(n, format!("bad header: {}", strip_position(&e))))?;
    if header.format != format {
        return Err(parse_err(
            n,
            format!("expected format {format:?}, found {:?}", header.format),
        ));
    }
    if header.version != FORMAT_VERSION {
        return Err(parse_err(
            n,
            format!("unsupported version {} (expected {FORMAT_VERSION})", header.version),
        ));
    }
    let mut records = Vec::new();
    for (n, line) in lines {
        let record = serde_json::from_str(line).map_err(|e| parse_err(n, strip_position(&e)))?;
        records.push((n, record));
    }
    Ok((header, records))
}

/// serde_json appends "at line 1 column N", which is noise for single-line
/// records.
fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}
