use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// Column-named numeric table rendered as CSV.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = String>) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Formats a float for CSV output with full round-trip precision.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Result of one probe: pass/fail, a JSON summary and a CSV table.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub passed: bool,
    pub summary: Value,
    #[serde(skip)]
    pub table: CsvTable,
}

impl ProbeReport {
    pub fn new(name: impl Into<String>, passed: bool, summary: Value, table: CsvTable) -> Self {
        Self { name: name.into(), passed, summary, table }
    }

    pub fn json(&self) -> Value {
        serde_json::json!({ "probe": self.name, "passed": self.passed, "summary": self.summary })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let mut t = CsvTable::new(["n", "err"]);
        t.push([4.to_string(), num(0.5)]);
        assert_eq!(t.render(), "n,err\n4,5.0000000000000000e-1\n");
    }
}
