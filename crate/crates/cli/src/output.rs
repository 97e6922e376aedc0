//! Deterministic CSV/JSON emission with atomic file replacement.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Shortest text that round-trips is not stable across formatters, so every
/// float is written with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV table built in memory. Cells are added as already formatted text.
#[derive(Debug, Clone)]
pub struct Table {
    columns: usize,
    text: String,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = String::new();
        push_row(&mut text, header.iter().map(|s| s.as_ref()));
        Table {
            columns: header.len(),
            text,
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.columns, "row width must match header");
        push_row(&mut self.text, cells.iter().map(|s| s.as_ref()));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

fn push_row<'a>(out: &mut String, cells: impl Iterator<Item = &'a str>) {
    for (i, c) in cells.enumerate() {
        if i > 0 {
            out.push(',');
        }
        debug_assert!(!c.contains(',') && !c.contains('\n'));
        let _ = write!(out, "{c}");
    }
    out.push('\n');
}

pub fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values always serialize");
    s.push('\n');
    s
}

/// Write to a temporary sibling and rename it over `dir/name`.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let target = dir.join(name);
    let wrap = |e: std::io::Error| CliError::Write {
        path: target.clone(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(wrap)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(wrap)?;
    fs::rename(&tmp, &target).map_err(wrap)?;
    Ok(target)
}
