//! Run configuration: defaults, optional `key = value` file, then CLI overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atom_energy::SlopeConvention;
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Solver tolerance (self-consistency residuals).
    pub tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub mc_samples: usize,
    /// Atom grid: nodes between `r_min` and `r_max`.
    pub grid_nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub q: f64,
    pub n: f64,
    pub potential: String,
    pub x_unknown: f64,
    pub slope_convention: SlopeConvention,
    pub theory_slope: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = QuadratureSpec::default();
        Self {
            seed: spec.seed,
            tol: 1e-6,
            rel_tol: spec.rel_tol,
            abs_tol: spec.abs_tol,
            max_evals: spec.max_evals,
            mc_samples: spec.mc_samples,
            grid_nodes: 2000,
            r_min: 1e-6,
            r_max: 1e4,
            q: 1.0,
            n: 100.0,
            potential: "r^2".into(),
            x_unknown: 0.0,
            slope_convention: SlopeConvention::PerLnN,
            theory_slope: crate::data::default_theory_slope(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::invalid(format!("bad value '{v}' for '{key}'")))
}

impl RunConfig {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_evals: self.max_evals,
            mc_samples: self.mc_samples,
            seed: self.seed,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse_num(key, v)?,
            "tol" => self.tol = parse_num(key, v)?,
            "rel_tol" => self.rel_tol = parse_num(key, v)?,
            "abs_tol" => self.abs_tol = parse_num(key, v)?,
            "max_evals" => self.max_evals = parse_num(key, v)?,
            "mc_samples" => self.mc_samples = parse_num(key, v)?,
            "grid_nodes" => self.grid_nodes = parse_num(key, v)?,
            "r_min" => self.r_min = parse_num(key, v)?,
            "r_max" => self.r_max = parse_num(key, v)?,
            "q" => self.q = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "potential" => self.potential = v.to_string(),
            "x_unknown" => self.x_unknown = parse_num(key, v)?,
            "slope_convention" => self.slope_convention = v.parse()?,
            "theory_slope" => self.theory_slope = parse_num(key, v)?,
            other => return Err(Error::invalid(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected 'key = value', found '{line}'"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse { path: path.into(), line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        self.apply_text(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec().validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.grid_nodes < 16 || !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err(Error::invalid("atom grid needs >= 16 nodes and 0 < r_min < r_max"));
        }
        Ok(())
    }

    /// Every key with its value, in the file format.
    pub fn to_text(&self) -> String {
        let map: BTreeMap<&str, String> = [
            ("seed", self.seed.to_string()),
            ("tol", format!("{:e}", self.tol)),
            ("rel_tol", format!("{:e}", self.rel_tol)),
            ("abs_tol", format!("{:e}", self.abs_tol)),
            ("max_evals", self.max_evals.to_string()),
            ("mc_samples", self.mc_samples.to_string()),
            ("grid_nodes", self.grid_nodes.to_string()),
            ("r_min", format!("{:e}", self.r_min)),
            ("r_max", format!("{:e}", self.r_max)),
            ("q", self.q.to_string()),
            ("n", self.n.to_string()),
            ("potential", self.potential.clone()),
            ("x_unknown", self.x_unknown.to_string()),
            ("slope_convention", self.slope_convention.label().to_string()),
            ("theory_slope", self.theory_slope.to_string()),
        ]
        .into_iter()
        .collect();
        map.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
