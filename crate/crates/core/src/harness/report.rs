use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CellResult, COLUMNS};
use crate::error::Result;
use crate::threads::catalog::find_entry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl Report {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Letter of the cell for a catalog row and matrix column, if present.
    pub fn letter(&self, algorithm: &str, variant: &str, column: usize) -> Option<&str> {
        let (kind, mode) = COLUMNS[column];
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.variant == variant && c.registers == kind && c.conc == mode)
            .map(|c| c.verdict_letter.as_str())
    }

    /// The six letters of a row separated by spaces, `.` for absent cells.
    pub fn row_letters(&self, algorithm: &str, variant: &str) -> String {
        (0..COLUMNS.len())
            .map(|i| self.letter(algorithm, variant, i).unwrap_or("."))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn row_label(algorithm: &str, variant: &str) -> String {
    find_entry(algorithm, variant).map_or_else(|| format!("{algorithm}/{variant}"), |e| e.row.to_string())
}

pub fn render_report(r: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => r.to_json(),
        ReportFormat::Text => Ok(render_text(r)),
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "suite: {}", r.suite);
    let _ = writeln!(out, "{:<34} {:>2}  Sa Re  T  S  I  A", "algorithm", "N");
    let _ = writeln!(out, "{:<34} {:>2}  (letters: safe regular atomic-T atomic-S atomic-I atomic-A)", "", "");
    let mut rows: Vec<(&str, &str, usize)> = Vec::new();
    for c in &r.cells {
        let key = (c.algorithm.as_str(), c.variant.as_str(), c.threads);
        if !rows.contains(&key) {
            rows.push(key);
        }
    }
    for (a, v, n) in &rows {
        let _ = writeln!(out, "{:<34} {:>2}  {}", row_label(a, v), n, r.row_letters(a, v));
    }
    let others: Vec<&CellResult> =
        r.cells.iter().filter(|c| !COLUMNS.contains(&(c.registers, c.conc))).collect();
    if !others.is_empty() {
        let _ = writeln!(out, "\nother cells:");
        for c in others {
            let _ = writeln!(out, "{:<34} {:>2}  {} {}: {}", row_label(&c.algorithm, &c.variant), c.threads, c.registers.name(), c.conc, c.verdict_letter);
        }
    }
    for c in &r.cells {
        if let Some(e) = &c.error {
            let _ = writeln!(out, "\n{} {} {}: {e}", row_label(&c.algorithm, &c.variant), c.registers.name(), c.conc);
        }
        if let Some(w) = &c.witness {
            let _ = writeln!(
                out,
                "\n{} {} {}: {} violated ({} states)\n{}",
                row_label(&c.algorithm, &c.variant),
                c.registers.name(),
                c.conc,
                w.property,
                c.stats.states,
                w.render().trim_end()
            );
        }
    }
    out
}
