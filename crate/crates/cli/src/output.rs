use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

/// Columns of numbers written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// `#`-prefixed provenance block: version, command, tolerances and the
/// full resolved configuration.
pub fn provenance(cfg: &RunConfig, command: &str, notes: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qedbloch {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command = {command}");
    let _ = writeln!(out, "# cutoff = {}", cfg.cutoff.describe());
    let _ = writeln!(
        out,
        "# grid = {} radial x {} polar x {} azimuthal, max_r = {:?}",
        cfg.radial.n_radial, cfg.angular.n_polar, cfg.angular.n_azimuth, cfg.radial.max_r
    );
    let _ = writeln!(out, "# tolerances: ode dt = {:?}, time nodes = {}", cfg.time.dt, cfg.time.n_time);
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    let _ = writeln!(out, "# --- configuration ---");
    for line in cfg.serialize().lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn render_csv(table: &Table, header: &str) -> String {
    let mut out = String::from(header);
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}
