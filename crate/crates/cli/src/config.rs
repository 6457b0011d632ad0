//! Flat `key = value` configuration files and resolution of run parameters.
//!
//! Precedence is command-line flag, then config file, then built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Parsed config file: keys are normalized to `snake_case`.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read config {path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("config line {}: expected `key = value`", n + 1)))?;
            entries.insert(normalize(k.trim()), v.trim().to_string());
        }
        Ok(Self { entries })
    }
}

fn normalize(key: &str) -> String {
    key.replace('-', "_").to_ascii_lowercase()
}

/// Resolved parameters of one run, recorded for metadata and hashing.
#[derive(Debug)]
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    resolved: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.file.entries.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| CliError::Invalid(format!("config key `{key}`: cannot parse `{s}`"))),
        }
    }

    /// Flag, else config key, else `default`.
    pub fn get<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Flag, else config key; missing values are an error.
    pub fn require<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file(key)?
                .ok_or_else(|| CliError::Usage(format!("missing required parameter --{}", key.replace('_', "-"))))?,
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Output path: flag, else config key. Not recorded, so it stays out of
    /// the hash.
    pub fn path(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.file.entries.get(key).cloned())
    }

    /// Comma-separated list.
    pub fn list(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<Vec<f64>, CliError> {
        let s = self.get(key, flag, default.to_string())?;
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| CliError::Invalid(format!("`{key}`: cannot parse `{x}` as a number")))
            })
            .collect()
    }

    /// Sorted `key = value` lines.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// First 16 hex digits of the SHA-256 of the command and its resolved
    /// parameters.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in &self.resolved {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Fails unless `v > 0` and finite.
pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Invalid(format!("--{name} must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flag_then_file_then_default() {
        let file = ConfigFile::parse("rho = 0.5\n# comment\nt-max = 3 # trailing\n").unwrap();
        let mut r = Resolver::new(&file);
        assert_eq!(r.get("rho", Some(2.0), 1.0).unwrap(), 2.0);
        assert_eq!(r.get("t_max", None, 1.0).unwrap(), 3.0);
        assert_eq!(r.get("seed", None, 7u64).unwrap(), 7);
        assert!(r.require::<f64>("r1", None).is_err());
    }

    #[test]
    fn hash_depends_on_values_only() {
        let file = ConfigFile::default();
        let mut a = Resolver::new(&file);
        a.get("rho", Some(1.0), 0.0).unwrap();
        let mut b = Resolver::new(&file);
        b.get("rho", None, 1.0).unwrap();
        assert_eq!(a.hash("kernel"), b.hash("kernel"));
        assert_eq!(a.hash("kernel").len(), 16);
        let mut c = Resolver::new(&file);
        c.get("rho", Some(2.0), 0.0).unwrap();
        assert_ne!(a.hash("kernel"), c.hash("kernel"));
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ConfigFile::parse("rho 1").is_err());
        let file = ConfigFile::parse("rho = abc").unwrap();
        assert!(Resolver::new(&file).get("rho", None, 1.0).is_err());
    }
}
