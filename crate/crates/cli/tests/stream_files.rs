use std::fs;

use fewstate_cli::io::{read_stream, write_stream};
use fewstate_cli::StreamFileError;
use fewstate_core::generators::zipf;
use fewstate_core::Stream;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn round_trip() {
    let dir = TempDir::new().unwrap();
    let stream = zipf(64, 500, 1.1, 3).unwrap();
    let path = dir.path().join("z.txt");
    write_stream(&path, &stream).unwrap();
    assert_eq!(read_stream(&path).unwrap(), stream);
}

#[test]
fn empty_stream_is_valid() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "e.txt", "n=4 m=0\n");
    assert_eq!(read_stream(&path).unwrap(), Stream::new(4, vec![]));
}

#[test]
fn blank_lines_are_skipped() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "b.txt", "n=4 m=2\n1\n\n4\n\n");
    assert_eq!(read_stream(&path).unwrap().items, vec![1, 4]);
}

#[test]
fn each_defect_has_its_own_error() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("zero", "n=4 m=1\n0\n"),
        ("big", "n=4 m=1\n5\n"),
        ("short", "n=4 m=3\n1\n2\n"),
        ("header", "m=3 n=4\n1\n"),
        ("word", "n=4 m=1\nx\n"),
        ("long", "n=4 m=1\n1\n2\n"),
    ];
    let errs: Vec<StreamFileError> = cases
        .iter()
        .map(|(name, text)| read_stream(&write(&dir, name, text)).unwrap_err())
        .collect();
    assert!(matches!(errs[0], StreamFileError::OutOfRange { item: 0, line: 2, .. }));
    assert!(matches!(errs[1], StreamFileError::OutOfRange { item: 5, n: 4, .. }));
    assert!(matches!(errs[2], StreamFileError::Truncated { expected: 3, found: 2, .. }));
    assert!(matches!(errs[3], StreamFileError::MalformedHeader { .. }));
    assert!(matches!(errs[4], StreamFileError::MalformedItem { line: 2, .. }));
    assert!(matches!(errs[5], StreamFileError::TrailingData { line: 3, .. }));
    assert!(matches!(read_stream(&dir.path().join("missing")), Err(StreamFileError::Io { .. })));
}
