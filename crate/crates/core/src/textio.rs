//! Small helpers shared by the plain-text file formats.
//!
//! All formats are line-oriented: optional `# key=value` comment lines, one
//! header line, then comma-separated data rows. Floats are printed with the
//! shortest representation that round-trips, so save/load is bit-exact.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent()
        && !parent.as_os_str().is_empty()
    {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Split a data row on commas, keeping each field's 1-based start column.
pub(crate) fn fields_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, b) in line.bytes().enumerate() {
        if b == b',' {
            out.push((start + 1, &line[start..i]));
            start = i + 1;
        }
    }
    out.push((start + 1, &line[start..]));
    out
}

pub(crate) fn parse_field<T: FromStr>(
    field: &str,
    what: &str,
    path: &Path,
    line: usize,
    column: usize,
) -> Result<T> {
    field.trim().parse().map_err(|_| {
        Error::parse(
            path,
            line,
            column,
            format!("expected {what}, got {field:?}"),
        )
    })
}

/// Parse a `0`/`1` flag field.
pub(crate) fn parse_flag(
    field: &str,
    what: &str,
    path: &Path,
    line: usize,
    column: usize,
) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::parse(
            path,
            line,
            column,
            format!("expected {what} flag 0 or 1, got {other:?}"),
        )),
    }
}

pub(crate) fn flag(value: bool) -> &'static str {
    if value { "1" } else { "0" }
}

/// Collect `# key=value` comment lines from the top of a file; returns the
/// pairs plus the 0-based index of the first non-comment line.
pub(crate) fn leading_comments(lines: &[&str]) -> (Vec<(String, String)>, usize) {
    let mut pairs = Vec::new();
    let mut first_data = 0;
    for (i, line) in lines.iter().enumerate() {
        let Some(rest) = line.strip_prefix('#') else {
            first_data = i;
            break;
        };
        first_data = i + 1;
        if let Some((k, v)) = rest.trim().split_once('=') {
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    (pairs, first_data)
}

pub(crate) fn push_comment(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "# {key}={value}");
}

/// Comma-join floats with round-trip formatting.
pub(crate) fn join_floats(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

pub(crate) fn parse_float_list(
    value: &str,
    expected_len: usize,
    what: &str,
    path: &Path,
    line: usize,
) -> Result<Vec<f64>> {
    let fields = fields_with_columns(value);
    if fields.len() != expected_len {
        return Err(Error::parse(
            path,
            line,
            1,
            format!(
                "{what}: expected {expected_len} values, got {}",
                fields.len()
            ),
        ));
    }
    fields
        .iter()
        .map(|(col, f)| parse_field(f, "a number", path, line, *col))
        .collect()
}
