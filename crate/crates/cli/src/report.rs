//! Versioned job reports: every invariant checked, with residual, tolerance
//! and verdict.

use serde::Serialize;
use std::path::Path;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InvariantEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub invariants: Vec<InvariantEntry>,
    pub outputs: Vec<String>,
    pub status: String,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            invariants: Vec::new(),
            outputs: Vec::new(),
            status: "ok".into(),
        }
    }

    pub fn check(&mut self, name: &str, residual: f64, tolerance: f64) -> bool {
        let pass = residual.is_finite() && residual <= tolerance;
        self.invariants.push(InvariantEntry {
            name: name.to_string(),
            residual,
            tolerance,
            pass,
        });
        pass
    }

    /// Record a value without a pass/fail decision (tolerance = infinity).
    pub fn note(&mut self, name: &str, value: f64) {
        self.invariants.push(InvariantEntry {
            name: name.to_string(),
            residual: value,
            tolerance: f64::INFINITY,
            pass: true,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|e| e.pass)
    }

    pub fn finalize(&mut self) {
        if !self.all_pass() {
            self.status = "invariant_failure".into();
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
