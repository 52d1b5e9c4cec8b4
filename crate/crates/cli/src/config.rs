//! Flat-JSON configuration with flag > file > default precedence.
//!
//! A config file is a single JSON object whose keys mirror flag names,
//! e.g. `{"grid": 1024, "eps": 1e-3, "max-iter": 5000}`. Unknown keys are
//! rejected up front so a typo cannot silently fall back to a default.
//! Every knob resolved through here lands in the effective-config map;
//! the manifest embeds that map and hashes it, so a manifest pins the
//! exact configuration a rerun needs.

use bcpatch_core::{Error, Result};
use serde_json::{Map, Number, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Union of flag names across all subcommands.
const KNOWN_KEYS: &[&str] = &[
    "csv", "delta", "eps", "eps-list", "grid", "id", "init", "init-file",
    "max-iter", "modes", "nodes", "omega", "out", "pairs", "phi", "r-min",
    "radii", "report", "s", "seed", "terms", "threads", "tol", "trials",
    "x1", "x2", "y1", "y2",
];

pub struct Resolver {
    file: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    Error::InvalidParam(format!("cannot read config file {}: {e}", p.display()))
                })?;
                let value: Value = serde_json::from_str(&text)?;
                let Value::Object(map) = value else {
                    return Err(Error::Format(format!(
                        "config file {} must hold a flat JSON object",
                        p.display()
                    )));
                };
                for (key, v) in &map {
                    if !KNOWN_KEYS.contains(&key.as_str()) {
                        return Err(Error::InvalidParam(format!(
                            "unknown config key {key:?} in {}",
                            p.display()
                        )));
                    }
                    if v.is_object() {
                        return Err(Error::Format(format!(
                            "config key {key:?} must be a scalar or an array, got an object"
                        )));
                    }
                }
                map
            }
        };
        Ok(Resolver {
            file,
            resolved: BTreeMap::new(),
        })
    }

    /// Effective values of every knob the command consulted, in the order
    /// the manifest serializes them.
    pub fn resolved(&self) -> &BTreeMap<String, Value> {
        &self.resolved
    }

    fn record_f64(&mut self, key: &str, v: f64) -> Result<f64> {
        let n = Number::from_f64(v).ok_or_else(|| {
            Error::InvalidParam(format!("{key} must be a finite number, got {v}"))
        })?;
        self.resolved.insert(key.to_string(), Value::Number(n));
        Ok(v)
    }

    fn file_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .as_f64()
                .map(Some)
                .ok_or_else(|| type_err(key, raw, "a number")),
        }
    }

    fn file_uint(&self, key: &str) -> Result<Option<u64>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .as_u64()
                .map(Some)
                .ok_or_else(|| type_err(key, raw, "a nonnegative integer")),
        }
    }

    fn file_string(&self, key: &str) -> Result<Option<String>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| type_err(key, raw, "a string")),
        }
    }

    pub fn f64(&mut self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        let v = match flag {
            Some(x) => x,
            None => self.file_f64(key)?.unwrap_or(default),
        };
        self.record_f64(key, v)
    }

    /// Like `f64` but with an optional fallback (e.g. a sidecar value);
    /// exhausting flag, file and fallback is an error naming the flag.
    pub fn f64_or(&mut self, flag: Option<f64>, key: &str, fallback: Option<f64>) -> Result<f64> {
        let v = match flag {
            Some(x) => Some(x),
            None => match self.file_f64(key)? {
                Some(x) => Some(x),
                None => fallback,
            },
        };
        match v {
            Some(x) => self.record_f64(key, x),
            None => Err(Error::InvalidParam(format!(
                "{key} is required: pass --{key}, set it in the config file, \
                 or use an input whose sidecar records it"
            ))),
        }
    }

    pub fn usize(&mut self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        let v = match flag {
            Some(x) => x as u64,
            None => self.file_uint(key)?.unwrap_or(default as u64),
        };
        self.resolved.insert(key.to_string(), Value::from(v));
        Ok(v as usize)
    }

    pub fn opt_usize(&mut self, flag: Option<usize>, key: &str) -> Result<Option<usize>> {
        let v = match flag {
            Some(x) => Some(x as u64),
            None => self.file_uint(key)?,
        };
        if let Some(x) = v {
            self.resolved.insert(key.to_string(), Value::from(x));
        }
        Ok(v.map(|x| x as usize))
    }

    pub fn u64(&mut self, flag: Option<u64>, key: &str, default: u64) -> Result<u64> {
        let v = match flag {
            Some(x) => x,
            None => self.file_uint(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), Value::from(v));
        Ok(v)
    }

    pub fn string(&mut self, flag: Option<&str>, key: &str, default: &str) -> Result<String> {
        let v = match flag {
            Some(x) => x.to_string(),
            None => self.file_string(key)?.unwrap_or_else(|| default.to_string()),
        };
        self.resolved.insert(key.to_string(), Value::from(v.clone()));
        Ok(v)
    }

    pub fn opt_string(&mut self, flag: Option<&str>, key: &str) -> Result<Option<String>> {
        let v = match flag {
            Some(x) => Some(x.to_string()),
            None => self.file_string(key)?,
        };
        if let Some(x) = &v {
            self.resolved.insert(key.to_string(), Value::from(x.clone()));
        }
        Ok(v)
    }

    pub fn path(&mut self, flag: Option<&Path>, key: &str) -> Result<Option<PathBuf>> {
        let v = match flag {
            Some(p) => Some(p.to_path_buf()),
            None => self.file_string(key)?.map(PathBuf::from),
        };
        if let Some(p) = &v {
            self.resolved
                .insert(key.to_string(), Value::from(p.display().to_string()));
        }
        Ok(v)
    }

    pub fn require_path(&mut self, flag: Option<&Path>, key: &str) -> Result<PathBuf> {
        self.path(flag, key)?.ok_or_else(|| {
            Error::InvalidParam(format!(
                "{key} is required: pass --{key} or set it in the config file"
            ))
        })
    }

    /// Comma-separated list on the command line, an array of numbers (or
    /// the same comma string) in the config file.
    pub fn eps_list(&mut self, flag: Option<&str>, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let list = match flag {
            Some(text) => parse_list(key, text)?,
            None => match self.file.get(key) {
                None => default.to_vec(),
                Some(Value::String(text)) => parse_list(key, text)?,
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| type_err(key, v, "a number")))
                    .collect::<Result<Vec<f64>>>()?,
                Some(other) => return Err(type_err(key, other, "an array of numbers")),
            },
        };
        let rendered = list
            .iter()
            .map(|&v| {
                Number::from_f64(v).map(Value::Number).ok_or_else(|| {
                    Error::InvalidParam(format!("{key} entries must be finite, got {v}"))
                })
            })
            .collect::<Result<Vec<Value>>>()?;
        self.resolved.insert(key.to_string(), Value::Array(rendered));
        Ok(list)
    }

    /// Record a value the command derived at run time (e.g. a default
    /// that depends on the loaded grid) so the manifest stays complete.
    pub fn record_derived(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_string(), v);
    }
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|piece| {
            piece.trim().parse::<f64>().map_err(|_| {
                Error::InvalidParam(format!("{key} entry {piece:?} is not a number"))
            })
        })
        .collect()
}

fn type_err(key: &str, got: &Value, want: &str) -> Error {
    Error::InvalidParam(format!("config key {key:?} must be {want}, got {got}"))
}
