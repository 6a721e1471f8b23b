//! Flat `section.key = value` configuration with typed keys and defaults.

use std::collections::BTreeMap;
use std::fmt;

use dkg_core::spectral_grid::MassParams;
use dkg_core::Error as CoreError;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Bool,
    UInt,
    Float,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Bool => "boolean",
            Kind::UInt => "non-negative integer",
            Kind::Float => "number",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Bool(bool),
    UInt(u64),
    Float(f64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::UInt(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
        }
    }
}

struct KeyDef {
    key: &'static str,
    kind: Kind,
    default: &'static str,
}

macro_rules! keys {
    ($($key:literal : $kind:ident = $default:literal),* $(,)?) => {
        &[$(KeyDef { key: $key, kind: Kind::$kind, default: $default }),*]
    };
}

const KEYS: &[KeyDef] = keys! {
    "grid.n": UInt = "32",
    "grid.L": Float = "16pi",
    "masses.M": Float = "1",
    "masses.m": Float = "1",
    "masses.allow_resonant": Bool = "false",
    "data.delta": Float = "0.01",
    "data.seed": UInt = "0",
    "data.eps": Float = "0.1",
    "data.width": Float = "3",
    "time.T": Float = "1",
    "time.dt": Float = "0.01",
    "output.every": UInt = "10",
    "output.snapshots": Bool = "true",
    "coupling.enabled": Bool = "true",
    "exec.parallel": Bool = "true",
    "simulate.charge_tol": Float = "1e-8",
    "simulate.projector_tol": Float = "1e-10",
    "reference.enabled": Bool = "false",
    "reference.dt": Float = "0.001",
    "reference.tol": Float = "1e-6",
    "picard.enabled": Bool = "false",
    "picard.T": Float = "5",
    "picard.nt": UInt = "50",
    "picard.iterations": UInt = "6",
    "picard.ratio": Float = "0.5",
    "resonance.samples": UInt = "100000",
    "resonance.seed": UInt = "0",
    "resonance.refine": UInt = "8",
    "resonance.positivity": Float = "1e-9",
    "resonance.nonres_min": Float = "0.1",
    "resonance.identity_tol": Float = "1e-10",
    "resonance.vanishing": Bool = "true",
    "algebra.samples": UInt = "10000",
    "algebra.seed": UInt = "0",
    "algebra.tol": Float = "1e-13",
    "algebra.null_kmax": UInt = "8",
    "algebra.null_stability": Float = "0.2",
    "kernel.kmax": UInt = "8",
    "kernel.points": UInt = "16",
    "kernel.refined_points": UInt = "24",
    "kernel.max_points": UInt = "144",
    "kernel.quadrature_tol": Float = "0.05",
    "kernel.spread": Float = "3",
    "kernel.stability": Float = "0.2",
    "trilinear.kmax": UInt = "4",
    "trilinear.grid": UInt = "64",
    "trilinear.trials": UInt = "50",
    "trilinear.seed": UInt = "0",
    "trilinear.bound": Float = "1",
    "trilinear.determinism": Bool = "true",
    "g.kmax": UInt = "64",
    "g.trials": UInt = "100",
    "g.seed": UInt = "0",
    "decompose.n": UInt = "16",
    "decompose.seed": UInt = "0",
    "decompose.time_samples": UInt = "32",
    "decompose.tol": Float = "1e-10",
    "decompose.max_overlap": UInt = "8",
    "scattering.T": Float = "12.5",
    "scattering.steps": UInt = "640",
    "scattering.samples": UInt = "64",
    "scattering.control": Bool = "true",
    "scattering.control_tol": Float = "1e-12",
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `section.key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{key}`")]
    Unknown { key: String },
    #[error("key `{key}`: expected a {expected}, found `{found}`")]
    Type {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("key `{key}`: {message}")]
    Constraint { key: String, message: String },
    #[error("override `{0}` has no value")]
    MissingValue(String),
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
}

fn parse_float(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
        return Some(c * std::f64::consts::PI);
    }
    s.parse::<f64>().ok()
}

fn parse_value(key: &str, kind: Kind, raw: &str) -> Result<Value, ConfigError> {
    let bad = || ConfigError::Type {
        key: key.to_string(),
        expected: kind.name(),
        found: raw.to_string(),
    };
    let t = raw.trim();
    match kind {
        Kind::Bool => match t {
            "true" | "yes" | "on" | "1" => Ok(Value::Bool(true)),
            "false" | "no" | "off" | "0" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Kind::UInt => t.parse::<u64>().map(Value::UInt).map_err(|_| bad()),
        Kind::Float => match parse_float(t) {
            Some(v) if v.is_finite() => Ok(Value::Float(v)),
            _ => Err(bad()),
        },
    }
}

fn def(key: &str) -> Result<&'static KeyDef, ConfigError> {
    KEYS.iter().find(|d| d.key == key).ok_or_else(|| ConfigError::Unknown { key: key.to_string() })
}

/// Fully resolved configuration: defaults, then file entries, then flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

impl RunConfig {
    pub fn defaults() -> Self {
        let values = KEYS
            .iter()
            .map(|d| (d.key, parse_value(d.key, d.kind, d.default).expect("valid default")))
            .collect();
        Self { values }
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let d = def(key)?;
        let v = parse_value(d.key, d.kind, raw)?;
        self.values.insert(d.key, v);
        Ok(())
    }

    /// Apply `section.key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Apply `--section.key=value` or `--section.key value` flags.
    pub fn apply_flags(&mut self, flags: &[String]) -> Result<(), ConfigError> {
        let mut it = flags.iter();
        while let Some(f) = it.next() {
            let body = f.trim_start_matches('-');
            match body.split_once('=') {
                Some((k, v)) => self.set(k, v)?,
                None => {
                    let v = it.next().ok_or_else(|| ConfigError::MissingValue(f.clone()))?;
                    self.set(body, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn resolve(file: Option<&str>, flags: &[String]) -> Result<Self, ConfigError> {
        let mut c = Self::defaults();
        if let Some(text) = file {
            c.apply_text(text)?;
        }
        c.apply_flags(flags)?;
        c.validate()?;
        Ok(c)
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("undeclared key {key}"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            Value::UInt(v) => *v as f64,
            Value::Bool(_) => panic!("{key} is boolean"),
        }
    }

    pub fn u64(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::UInt(v) => *v,
            other => panic!("{key} is not an unsigned integer: {other}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.u64(key) as usize
    }

    pub fn u32(&self, key: &str) -> u32 {
        self.u64(key) as u32
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(b) => *b,
            other => panic!("{key} is not boolean: {other}"),
        }
    }

    pub fn masses(&self) -> Result<MassParams, ConfigError> {
        MassParams::new(self.f64("masses.M"), self.f64("masses.m"), self.bool("masses.allow_resonant")).map_err(|e| {
            let key = match e {
                CoreError::MassCondition { .. } => "masses.m",
                _ => "masses.M",
            };
            ConfigError::Constraint {
                key: key.to_string(),
                message: e.to_string(),
            }
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| ConfigError::Constraint {
            key: key.to_string(),
            message,
        };
        self.masses()?;
        let n = self.usize("grid.n");
        if n < 4 || !n.is_power_of_two() {
            return Err(fail("grid.n", format!("{n} must be a power of two and at least 4")));
        }
        for d in KEYS.iter().filter(|d| d.kind == Kind::Float) {
            let v = self.f64(d.key);
            let nonneg = matches!(d.key, "data.delta" | "data.eps" | "masses.M" | "masses.m");
            if nonneg && v < 0.0 {
                return Err(fail(d.key, format!("{v} must be non-negative")));
            }
            if !nonneg && !(v > 0.0) {
                return Err(fail(d.key, format!("{v} must be positive")));
            }
        }
        for key in ["output.every", "picard.nt", "resonance.samples", "algebra.samples", "trilinear.trials", "scattering.steps", "scattering.samples"] {
            if self.u64(key) == 0 {
                return Err(fail(key, "must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Resolved configuration in the input format, one key per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid_default() {
        let c = RunConfig::resolve(Some(""), &[]).unwrap();
        assert_eq!(c.usize("grid.n"), 32);
        assert!((c.f64("grid.L") - 16.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn flags_override_file() {
        let c = RunConfig::resolve(Some("time.dt = 1e-2\n"), &["--time.dt=1e-3".into()]).unwrap();
        assert_eq!(c.f64("time.dt"), 1e-3);
        let c = RunConfig::resolve(Some("time.dt = 1e-2\n"), &["--time.dt".into(), "2e-3".into()]).unwrap();
        assert_eq!(c.f64("time.dt"), 2e-3);
    }

    #[test]
    fn resonant_masses_rejected() {
        let e = RunConfig::resolve(Some("masses.m = 2\nmasses.M = 1\n"), &[]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("2M > m > 0") && msg.contains("masses.m"), "{msg}");
        assert!(RunConfig::resolve(Some("masses.m = 2\nmasses.allow_resonant = true\n"), &[]).is_ok());
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::resolve(Some("grid.size = 4\n"), &[]).unwrap_err();
        assert!(e.to_string().contains("grid.size"));
        let e = RunConfig::resolve(Some("grid.n = many\n"), &[]).unwrap_err();
        assert!(e.to_string().contains("grid.n"));
        let e = RunConfig::resolve(None, &["--time.dt=-1".into()]).unwrap_err();
        assert!(e.to_string().contains("time.dt"));
        let e = RunConfig::resolve(Some("grid.n 4\n"), &[]).unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn resolved_text_round_trips() {
        let c = RunConfig::resolve(Some("grid.L = 2pi\ndata.seed = 7\n"), &[]).unwrap();
        let again = RunConfig::resolve(Some(&c.to_text()), &[]).unwrap();
        assert_eq!(c, again);
    }
}
