//! Line-delimited JSON log reading, shared by the registry and the archive
//! manifest. Appends elsewhere are line-atomic, so the only damage a crash
//! can leave is one torn trailing line; that line is skipped with a warning,
//! while corruption anywhere else is an error.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut pending_error: Option<(usize, String)> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some((line_no, message)) = pending_error.take() {
            return Err(Error::CorruptLog {
                path: path.to_path_buf(),
                line: line_no,
                message,
            });
        }
        match serde_json::from_str::<T>(&line) {
            Ok(record) => records.push(record),
            Err(e) => pending_error = Some((idx + 1, e.to_string())),
        }
    }
    if let Some((line_no, message)) = pending_error {
        tracing::warn!(path = %path.display(), line = line_no, %message, "skipping torn trailing line");
    }
    Ok(records)
}
