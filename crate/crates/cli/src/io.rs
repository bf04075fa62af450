//! Stream files: a header line `n=<int> m=<int>` followed by one decimal
//! item id per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fewstate_core::Stream;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed header `{header}` (expected `n=<int> m=<int>`)")]
    MalformedHeader { path: String, header: String },
    #[error("{path}:{line}: `{text}` is not an item id")]
    MalformedItem { path: String, line: usize, text: String },
    #[error("{path}:{line}: item {item} outside [1, {n}]")]
    OutOfRange { path: String, line: usize, item: u64, n: u64 },
    #[error("{path}: truncated, header promises {expected} items but the file holds {found}")]
    Truncated { path: String, expected: u64, found: u64 },
    #[error("{path}:{line}: data after the {expected} items promised by the header")]
    TrailingData { path: String, line: usize, expected: u64 },
}

fn parse_header(line: &str) -> Option<(u64, u64)> {
    let mut fields = line.split_whitespace();
    let n = fields.next()?.strip_prefix("n=")?.parse().ok()?;
    let m = fields.next()?.strip_prefix("m=")?.parse().ok()?;
    if fields.next().is_some() || n == 0 {
        return None;
    }
    Some((n, m))
}

pub fn read_stream(path: &Path) -> Result<Stream, StreamFileError> {
    let name = path.display().to_string();
    let io = |source| StreamFileError::Io { path: name.clone(), source };
    let mut lines = BufReader::new(File::open(path).map_err(io)?).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(io)?,
        None => String::new(),
    };
    let (n, m) = parse_header(&header).ok_or_else(|| StreamFileError::MalformedHeader {
        path: name.clone(),
        header: header.clone(),
    })?;
    let mut items = Vec::with_capacity(m.min(1 << 24) as usize);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(io)?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if items.len() as u64 == m {
            return Err(StreamFileError::TrailingData { path: name, line: line_no, expected: m });
        }
        let item: u64 = text.parse().map_err(|_| StreamFileError::MalformedItem {
            path: name.clone(),
            line: line_no,
            text: text.to_string(),
        })?;
        if item == 0 || item > n {
            return Err(StreamFileError::OutOfRange { path: name, line: line_no, item, n });
        }
        items.push(item);
    }
    if (items.len() as u64) < m {
        return Err(StreamFileError::Truncated {
            path: name,
            expected: m,
            found: items.len() as u64,
        });
    }
    Ok(Stream::new(n, items))
}

pub fn write_stream(path: &Path, stream: &Stream) -> Result<(), StreamFileError> {
    let file = File::create(path).map_err(|source| StreamFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_stream_to(BufWriter::new(file), stream).map_err(|source| StreamFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_stream_to<W: Write>(mut w: W, stream: &Stream) -> std::io::Result<()> {
    writeln!(w, "n={} m={}", stream.n, stream.items.len())?;
    for item in &stream.items {
        writeln!(w, "{item}")?;
    }
    w.flush()
}
