//! Run summaries and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Compare {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Invariant {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub compare: Compare,
    pub pass: bool,
}

impl Invariant {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            compare: Compare::AtMost,
            pass: value <= tolerance,
        }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            compare: Compare::AtLeast,
            pass: value >= tolerance,
        }
    }

    /// A yes/no check recorded as `1 >= 1`.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub invariants: Vec<Invariant>,
    pub details: Value,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            pass: true,
            invariants: Vec::new(),
            details: Value::Object(Default::default()),
        }
    }

    pub fn check(&mut self, inv: Invariant) {
        self.pass &= inv.pass;
        self.invariants.push(inv);
    }

    pub fn detail<T: Serialize>(&mut self, key: &str, value: &T) -> Result<(), CliError> {
        if let Value::Object(map) = &mut self.details {
            map.insert(key.to_string(), serde_json::to_value(value)?);
        }
        Ok(())
    }

    pub fn print(&self) {
        for inv in &self.invariants {
            let op = match inv.compare {
                Compare::AtMost => "<=",
                Compare::AtLeast => ">=",
            };
            println!(
                "{} {}: {:.6e} {op} {:.6e}",
                if inv.pass { "PASS" } else { "FAIL" },
                inv.name,
                inv.value,
                inv.tolerance
            );
        }
        println!("{}: {}", self.command, if self.pass { "pass" } else { "fail" });
    }
}

/// Output directory of one run.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.dir.join(name);
        fs::create_dir_all(&p)?;
        Ok(p)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.path(name), text)?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
