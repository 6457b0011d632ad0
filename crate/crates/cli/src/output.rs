//! CSV and JSON writers. Numbers carry 17 significant digits; metadata
//! lines start with `#`; every data row ends with the config hash.

use std::fmt::Write as _;
use std::io::Write;

use conewave::checks::{Cell, Table};

use crate::config::Resolver;
use crate::CliError;

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => num(*v),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// CSV document under construction.
pub struct Csv {
    text: String,
    hash: String,
}

impl Csv {
    pub fn new(command: &str, cfg: &Resolver, header: &[String]) -> Self {
        let hash = cfg.hash(command);
        let mut text = format!("# conewave {}\n# command = {command}\n# config_hash = {hash}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in cfg.entries() {
            let _ = writeln!(text, "# {k} = {v}");
        }
        let _ = writeln!(text, "{},config_hash", header.join(","));
        Self { text, hash }
    }

    pub fn meta(&mut self, key: &str, value: &str) {
        // Metadata emitted after the header still starts with '#'.
        let _ = writeln!(self.text, "# {key} = {value}");
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{},{}", fields.join(","), self.hash);
    }

    pub fn table(command: &str, cfg: &Resolver, table: &Table) -> Self {
        let mut csv = Self::new(command, cfg, &table.header);
        for r in &table.rows {
            let fields: Vec<String> = r.iter().map(cell).collect();
            csv.row(&fields);
        }
        csv
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes to `path`, or to standard output when `path` is `None` or `-`.
pub fn emit(path: Option<&str>, text: &str) -> Result<(), CliError> {
    match path {
        None | Some("-") => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Invalid(format!("cannot write to stdout: {e}")))
        }
        Some(p) => {
            if let Some(dir) = std::path::Path::new(p).parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", dir.display())))?;
                }
            }
            std::fs::write(p, text).map_err(|e| CliError::Invalid(format!("cannot write {p}: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.0 / (4.0 * std::f64::consts::PI)), "7.9577471545947673e-2");
        assert_eq!(num(-1.5), "-1.5000000000000000e0");
    }
}
