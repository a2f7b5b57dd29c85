//! CSV tables with `#`-prefixed header comments and atomic file output.
//!
//! Numbers are written with Rust's shortest round-trip `Display` form, so
//! output is locale independent and byte-identical across runs.

use std::io::{self, Write};
use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CsvTable {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Inserts comment lines ahead of the existing ones.
    pub fn prepend_comments<I, S>(&mut self, lines: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut all: Vec<String> = lines.into_iter().map(Into::into).collect();
        all.append(&mut self.comments);
        self.comments = all;
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn push_row<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&bytes).expect("utf-8 fields"));
        out
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write_atomic(&self, path: &Path) -> io::Result<()> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(self.render().as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_comments_header_and_quotes() {
        let mut t = CsvTable::new(["name", "value"]);
        t.comment("cmd=test");
        t.push_row(["a,b", "0.5"]);
        assert_eq!(t.render(), "# cmd=test\nname,value\n\"a,b\",0.5\n");
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut t = CsvTable::new(["x"]);
        t.push_row(["1"]);
        t.write_atomic(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x\n1\n");
    }
}
