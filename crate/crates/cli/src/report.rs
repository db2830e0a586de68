//! Tabular reports and their text/CSV renderings.
//!
//! Every number goes through [`num`] or [`pval`] so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(ToString::to_string).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell by row predicate on the first column.
    pub fn get(&self, key: &str, column: &str) -> Option<&str> {
        let c = self.column(column)?;
        self.rows.iter().find(|r| r[0] == key).map(|r| r[c].as_str())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    fn render(&self, out: &mut String) {
        let mut widths: Vec<usize> = self.columns.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String], out: &mut String| {
            let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        let _ = writeln!(out, "== {} ==", self.name);
        line(&self.columns, out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&rule, out);
        for r in &self.rows {
            line(r, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    /// Set when the analysis ran but its check did not pass; the report is
    /// still emitted and the process exits with the validation code.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), tables: Vec::new(), warnings: Vec::new(), failure: None }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn extend_warnings<I: IntoIterator<Item = String>>(&mut self, ws: I) {
        self.warnings.extend(ws);
    }

    /// Warnings as a table of their own, so the CSV output never drops them.
    fn warning_table(&self) -> Table {
        let mut t = Table::new("warnings", &["warning"]);
        for w in &self.warnings {
            t.push(vec![w.clone()]);
        }
        t
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            t.render(&mut out);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// All tables (warnings last) concatenated, each preceded by `# name`.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for t in self.tables.iter().chain(std::iter::once(&self.warning_table())) {
            let _ = writeln!(out, "# {}", t.name);
            out.push_str(&t.to_csv()?);
        }
        Ok(out)
    }

    /// One `<command>_<table>.csv` per table, including the warnings table.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for t in self.tables.iter().chain(std::iter::once(&self.warning_table())) {
            let path = dir.join(format!("{}_{}.csv", self.command.replace('-', "_"), t.name));
            fs::write(&path, t.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Fixed six-decimal rendering.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let s = format!("{x:.6}");
        // avoid "-0.000000"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// p-values in scientific notation; floored values get a leading `<`.
pub fn pval(p: f64, capped: bool) -> String {
    if capped {
        format!("<{p:.2e}")
    } else {
        format!("{p:.3e}")
    }
}

pub fn flag(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

pub fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_fixed_precision() {
        assert_eq!(num(0.1), "0.100000");
        assert_eq!(num(-1e-9), "0.000000");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(146.00000049), "146.000000");
        assert_eq!(pval(1e-20, true), "<1.00e-20");
        assert_eq!(pval(0.0123, false), "1.230e-2");
    }

    #[test]
    fn csv_quotes_and_keeps_warnings() {
        let mut r = Report::new("demo");
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        r.tables.push(t);
        r.warn("low power");
        let csv = r.to_csv().unwrap();
        assert!(csv.contains("\"x,y\",1"));
        assert!(csv.ends_with("# warnings\nwarning\nlow power\n"));
        assert!(r.to_text().contains("warning: low power"));
    }

    #[test]
    fn empty_warning_table_still_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report::new("simulate-filter");
        let files = r.write_csv(dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files[0].ends_with("simulate_filter_warnings.csv"));
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), "warning\n");
    }
}
