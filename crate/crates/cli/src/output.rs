//! CSV rendering with a '#' metadata header.

use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip scientific form; identical bits print identically.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// comment lines after the data
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, command: &str, scenario_json: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# starios {VERSION}");
        let _ = writeln!(s, "# command: {command}");
        let _ = writeln!(s, "# scenario: {scenario_json}");
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        for f in &self.footer {
            let _ = writeln!(s, "# {f}");
        }
        s
    }
}

/// Collects per-row condition tokens; renders `none` when nothing happened.
#[derive(Debug, Default)]
pub struct Flags(Vec<String>);

impl Flags {
    pub fn add(&mut self, column: &str, token: &str) {
        self.0.push(format!("{column}:{token}"));
    }

    pub fn render(self) -> String {
        if self.0.is_empty() {
            "none".into()
        } else {
            self.0.join(";")
        }
    }
}
