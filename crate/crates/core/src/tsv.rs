//! Tab-separated tables as used by every file format of the pipeline.
//!
//! Lines starting with `#` are comments (written tools put a provenance line
//! there). The first non-comment line is the header.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TsvRow {
    /// 1-based line number in the source text.
    pub line: usize,
    pub fields: Vec<String>,
}

impl TsvRow {
    pub fn get(&self, col: usize) -> &str {
        self.fields.get(col).map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, Default)]
pub struct TsvTable {
    pub header: Vec<String>,
    pub rows: Vec<TsvRow>,
}

impl TsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Ok(Self::default());
        };
        let header: Vec<String> = header.split('\t').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (line, l) in lines {
            let fields: Vec<String> = l.split('\t').map(str::to_string).collect();
            if fields.len() > header.len() {
                return Err(Error::format(
                    line,
                    format!("expected {} fields, found {}", header.len(), fields.len()),
                ));
            }
            rows.push(TsvRow { line, fields });
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| with_path(e, path))
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(1, format!("missing column `{name}`")))
    }

    /// Index of the first header matching any of `names`.
    pub fn column_any(&self, names: &[&str]) -> Result<usize> {
        names
            .iter()
            .find_map(|n| self.header.iter().position(|h| h == n))
            .ok_or_else(|| Error::format(1, format!("missing column `{}`", names[0])))
    }
}

/// Attaches a file path to line-level format errors.
pub fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Format { line, message } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    }
}

/// Comment line carried by every written file.
pub fn provenance(seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# lscd {} seed={s}", env!("CARGO_PKG_VERSION")),
        None => format!("# lscd {}", env!("CARGO_PKG_VERSION")),
    }
}

/// Builds a table text: provenance line, header, rows.
pub fn render<I, R>(seed: Option<u64>, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = provenance(seed);
    out.push('\n');
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_header() {
        let t = TsvTable::parse("# lscd 0.1.0\nlemma\tvalue\na\t1\n\nb\t2\n").unwrap();
        assert_eq!(t.header, vec!["lemma", "value"]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].line, 5);
        assert_eq!(t.column("value").unwrap(), 1);
    }

    #[test]
    fn too_many_fields_reports_line() {
        let err = TsvTable::parse("a\tb\n1\t2\t3\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }
}
