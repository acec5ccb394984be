//! Profile dumps: `#`-prefixed `key = value` header lines, then `r,mu_plus,mu_plus_prime`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::atom::TFAtomSolution;
use super::dot::TFDotSolution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileDump {
    pub header: BTreeMap<String, String>,
    pub r: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub mu_plus_prime: Vec<f64>,
}

/// 17 significant digits, enough for an exact round trip.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl ProfileDump {
    pub fn from_atom(sol: &TFAtomSolution) -> Self {
        let mut header = BTreeMap::new();
        header.insert("d".into(), "3".into());
        header.insert("q".into(), fmt17(sol.q));
        header.insert("mu_global".into(), fmt17(sol.mu_global));
        header.insert("residual".into(), fmt17(sol.residual));
        header.insert("grid_size".into(), sol.grid.len().to_string());
        Self {
            header,
            r: sol.grid.nodes().to_vec(),
            mu_plus: sol.mu_plus.clone(),
            mu_plus_prime: sol.mu_plus_prime.clone(),
        }
    }

    pub fn from_dot(sol: &TFDotSolution) -> Self {
        let mut header = BTreeMap::new();
        header.insert("d".into(), "2".into());
        header.insert("confinement".into(), sol.confinement.description.clone());
        header.insert("mu_global".into(), fmt17(sol.mu_global));
        header.insert("support_radius".into(), fmt17(sol.support_radius));
        header.insert("residual".into(), fmt17(sol.residual));
        header.insert("grid_size".into(), sol.grid.len().to_string());
        Self {
            header,
            r: sol.grid.nodes().to_vec(),
            mu_plus: sol.mu_plus.clone(),
            mu_plus_prime: sol.mu_plus_prime.clone(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str("r,mu_plus,mu_plus_prime\n");
        for i in 0..self.r.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt17(self.r[i]),
                fmt17(self.mu_plus[i]),
                fmt17(self.mu_plus_prime[i])
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut dump = ProfileDump::default();
        let mut seen_columns = false;
        let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| err(ln, format!("header line without '=': {line:?}")))?;
                dump.header.insert(k.trim().to_string(), v.trim().to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !seen_columns {
                if line.trim() != "r,mu_plus,mu_plus_prime" {
                    return Err(err(ln, format!("expected column header, got {line:?}")));
                }
                seen_columns = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(err(ln, format!("expected 3 columns, got {}", cols.len())));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| err(ln, format!("{e}: {s:?}")));
            dump.r.push(parse(cols[0])?);
            dump.mu_plus.push(parse(cols[1])?);
            dump.mu_plus_prime.push(parse(cols[2])?);
        }
        if !seen_columns {
            return Err(err(0, "missing column header".into()));
        }
        Ok(dump)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }
}
