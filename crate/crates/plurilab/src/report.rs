//! Versioned JSON reports written by the command-line front-end.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

/// Schema identifier embedded in every report.
pub const SCHEMA: &str = "plurilab/1";

/// A machine-readable run record: the input echo, the tolerances in force,
/// result tables and any invariant violations.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub input: Value,
    pub tolerances: Map<String, Value>,
    pub results: Map<String, Value>,
    pub violations: Vec<String>,
}

impl Report {
    pub fn new(command: &str, input: Value) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            input,
            tolerances: Map::new(),
            results: Map::new(),
            violations: Vec::new(),
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), Value::from(value));
    }

    /// Stores a serialisable result under `name`.
    pub fn result<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.results.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Records a violation when `ok` is false.
    pub fn expect(&mut self, ok: bool, message: impl Into<String>) {
        if !ok {
            self.violations.push(message.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_records_violations_and_schema() {
        let mut r = Report::new("demo", serde_json::json!({"seed": 1}));
        r.tolerance("tol", 1e-6);
        r.result("x", &vec![1.0, 2.0]).unwrap();
        r.expect(true, "never recorded");
        assert!(r.passed());
        r.expect(false, "bound failed");
        assert_eq!(r.violations, vec!["bound failed".to_string()]);
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["schema"], "plurilab/1");
        assert_eq!(json["tolerances"]["tol"], 1e-6);
        assert_eq!(json["results"]["x"][1], 2.0);
    }
}
