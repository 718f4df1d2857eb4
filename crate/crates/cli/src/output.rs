//! Self-describing CSV assembly. Every output starts with `#`-prefixed
//! metadata (tool version, seed, optional timestamp, an indented echo of
//! the resolved configuration), followed by one header row and data rows.
//! Floats are always written as `{:.10e}`, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;

/// Fixed scientific formatting for every float in the output.
pub fn fnum(x: f64) -> String {
    format!("{x:.10e}")
}

/// One cell of a data row.
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Incremental CSV writer backed by a string, so the whole file is
/// assembled before anything touches disk or stdout.
pub struct CsvBuilder {
    buf: String,
}

impl CsvBuilder {
    pub fn new() -> Self {
        Self { buf: String::new() }
    }

    /// Free-form metadata line: `# {line}`.
    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.buf, "# {line}");
    }

    /// Structured metadata line: `# {key} = {value}`.
    pub fn key_value(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.buf, "# {key} = {value}");
    }

    /// Echo a TOML document as indented metadata lines.
    pub fn config_echo(&mut self, toml_text: &str) {
        self.comment("config:");
        for line in toml_text.lines() {
            if line.is_empty() {
                let _ = writeln!(self.buf, "#");
            } else {
                let _ = writeln!(self.buf, "#   {line}");
            }
        }
    }

    /// Column header row.
    pub fn header(&mut self, cols: &[&str]) {
        let _ = writeln!(self.buf, "{}", cols.join(","));
    }

    /// Data row of plain floats.
    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fnum(v)).collect();
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    /// Data row mixing numbers, integers, and labels.
    pub fn mixed_row(&mut self, cells: &[Cell]) {
        let rendered: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fnum(*x),
                Cell::Int(n) => n.to_string(),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        let _ = writeln!(self.buf, "{}", rendered.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
