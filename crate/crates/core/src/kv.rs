//! Flat key-value text documents.
//!
//! The on-disk format used for scenarios, sweep specs, and result documents:
//! one `key = value` pair per line, `#` comments, arrays as comma-separated
//! lists, matrices as semicolon-separated rows of comma-separated entries.
//! Floats are emitted with 17 significant digits so that parse(emit(doc))
//! reproduces every f64 bit-for-bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Error;

/// An ordered key-value document. Emission order follows insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    keys: Vec<String>,
    map: BTreeMap<String, String>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        if !self.map.contains_key(key) {
            self.keys.push(key.to_string());
        }
        self.map.insert(key.to_string(), value.into());
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, format_f64(value));
    }

    pub fn set_usize(&mut self, key: &str, value: usize) {
        self.set(key, value.to_string());
    }

    pub fn set_u64(&mut self, key: &str, value: u64) {
        self.set(key, value.to_string());
    }

    pub fn set_vec(&mut self, key: &str, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|v| format_f64(*v)).collect();
        self.set(key, joined.join(","));
    }

    pub fn set_matrix(&mut self, key: &str, rows: &[Vec<f64>]) {
        let joined: Vec<String> = rows
            .iter()
            .map(|r| r.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(","))
            .collect();
        self.set(key, joined.join(";"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str, Error> {
        self.get(key)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing key `{key}`") })
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, Error> {
        parse_f64(self.require(key)?, key)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, Error> {
        let raw = self.require(key)?;
        raw.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            message: format!("key `{key}`: `{raw}` is not an integer"),
        })
    }

    pub fn get_u64(&self, key: &str) -> Result<u64, Error> {
        let raw = self.require(key)?;
        raw.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            message: format!("key `{key}`: `{raw}` is not an integer"),
        })
    }

    pub fn get_vec(&self, key: &str) -> Result<Vec<f64>, Error> {
        self.require(key)?
            .split(',')
            .map(|s| parse_f64(s, key))
            .collect()
    }

    pub fn get_matrix(&self, key: &str) -> Result<Vec<Vec<f64>>, Error> {
        self.require(key)?
            .split(';')
            .map(|row| row.split(',').map(|s| parse_f64(s, key)).collect())
            .collect()
    }

    /// Parse a document from text. Later duplicates of a key overwrite earlier
    /// ones.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut doc = KvDoc::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse { line: idx + 1, message: "empty key".into() });
            }
            doc.set(key, value.trim());
        }
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for key in &self.keys {
            let _ = writeln!(out, "{} = {}", key, self.map[key]);
        }
        out
    }
}

fn parse_f64(raw: &str, key: &str) -> Result<f64, Error> {
    raw.trim().parse().map_err(|_| Error::Parse {
        line: 0,
        message: format!("key `{key}`: `{raw}` is not a number"),
    })
}

/// Round-trip safe f64 formatting (17 significant digits).
pub fn format_f64(value: f64) -> String {
    if value == value.trunc() && value.abs() < 1e15 {
        // keep integral values readable
        format!("{}", value)
    } else {
        format!("{:.16e}", value)
    }
}
