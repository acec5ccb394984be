//! Reference correlation-energy tables and the offset fit
//! `Ē_c = −slope·N·L(N) + c′N`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atom_energy::{SlopeConvention, HARTREE_PER_UNIT, LOG_COEFF};
use crate::error::{Error, Result};
use crate::numerics::compensated_sum;
use crate::tf::profile_io::fmt17;

pub const CSV_HEADER: [&str; 4] = ["n", "label", "e_corr_hartree", "source"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "exp")]
    Exp,
    #[serde(rename = "ext-hf")]
    ExtHf,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Exp => "exp",
            Source::ExtHf => "ext-hf",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Source {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exp" => Ok(Source::Exp),
            "ext-hf" => Ok(Source::ExtHf),
            other => Err(format!("unknown source tag '{other}' (expected exp or ext-hf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub n: u32,
    pub label: String,
    pub e_corr_hartree: f64,
    pub source: Source,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDataset {
    pub records: Vec<CorrelationRecord>,
}

impl CorrelationDataset {
    pub fn new(records: Vec<CorrelationRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            validate_record(r)?;
            if !seen.insert((r.source, r.n)) {
                return Err(Error::invalid(format!("duplicate n = {} in source {}", r.n, r.source)));
            }
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn filter_source(&self, source: Source) -> Self {
        Self { records: self.records.iter().filter(|r| r.source == source).cloned().collect() }
    }

    pub fn sources(&self) -> Vec<Source> {
        self.records.iter().map(|r| r.source).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!("{},{},{},{}\n", r.n, r.label, fmt17(r.e_corr_hartree), r.source));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io { path: path.into(), source })
    }
}

fn validate_record(r: &CorrelationRecord) -> Result<()> {
    if r.n < 1 {
        return Err(Error::invalid("electron count must be >= 1"));
    }
    if !r.e_corr_hartree.is_finite() {
        return Err(Error::invalid(format!("non-finite correlation energy for n = {}", r.n)));
    }
    Ok(())
}

/// Parses a table with header `n,label,e_corr_hartree,source`. Lines starting
/// with `#` are comments.
pub fn parse_correlation_csv(text: &str, path: &Path) -> Result<CorrelationDataset> {
    let err = |line: usize, msg: String| Error::Parse { path: path.into(), line, msg };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        let line = header.position().map_or(1, |p| p.line() as usize);
        return Err(err(line, format!("expected header '{}', found '{}'", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 4 {
            return Err(err(line, format!("expected 4 fields, found {}", row.len())));
        }
        let n: u32 = row[0].parse().map_err(|_| err(line, format!("bad electron count '{}'", &row[0])))?;
        let e: f64 = row[2].parse().map_err(|_| err(line, format!("bad energy '{}'", &row[2])))?;
        let source: Source = row[3].parse().map_err(|m| err(line, m))?;
        let rec = CorrelationRecord { n, label: row[1].to_string(), e_corr_hartree: e, source };
        validate_record(&rec).map_err(|e| err(line, e.to_string()))?;
        if !seen.insert((source, n)) {
            return Err(err(line, format!("duplicate n = {n} in source {source}")));
        }
        records.push(rec);
    }
    Ok(CorrelationDataset { records })
}

pub fn load_correlation_csv(path: &Path) -> Result<CorrelationDataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    parse_correlation_csv(&text, path)
}

/// Theory slope of `−Ē_c/N` against the convention's log term: `2·0.03109`.
pub fn default_theory_slope() -> f64 {
    HARTREE_PER_UNIT * LOG_COEFF
}

fn log_term(conv: SlopeConvention, n: f64) -> f64 {
    match conv {
        SlopeConvention::PerLnN => n.ln(),
        SlopeConvention::PerLnNCubeRoot => n.ln() / 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResidual {
    pub n: u32,
    pub label: String,
    pub source: Source,
    pub data: f64,
    pub model: f64,
    /// `data − model`, hartree.
    pub residual: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope_convention: SlopeConvention,
    pub slope: f64,
    pub c_prime: f64,
    pub residuals: Vec<FitResidual>,
    /// `None` without records at `n ≥ 10`.
    pub max_rel_dev_n_ge_10: Option<f64>,
    pub records: usize,
}

impl FitResult {
    pub fn model(&self, n: f64) -> f64 {
        n * (-self.slope * log_term(self.slope_convention, n) + self.c_prime)
    }
}

/// Least-squares `c′` for `Ē_c/N = −slope·L(N) + c′` with the slope held fixed.
/// The mean is taken over records sorted by `(source, n)`, so the result does
/// not depend on input order.
pub fn fit_offset(ds: &CorrelationDataset, conv: SlopeConvention, theory_slope: f64) -> Result<FitResult> {
    if ds.len() < 3 {
        return Err(Error::invalid(format!("fit needs at least 3 records, got {}", ds.len())));
    }
    if !theory_slope.is_finite() {
        return Err(Error::invalid("theory slope must be finite"));
    }
    let mut recs: Vec<&CorrelationRecord> = ds.records.iter().collect();
    recs.sort_by_key(|r| (r.source, r.n));
    let offsets: Vec<f64> = recs
        .iter()
        .map(|r| {
            let n = r.n as f64;
            r.e_corr_hartree / n + theory_slope * log_term(conv, n)
        })
        .collect();
    let c_prime = compensated_sum(offsets.iter().copied()) / offsets.len() as f64;
    let mut fit = FitResult {
        slope_convention: conv,
        slope: theory_slope,
        c_prime,
        residuals: Vec::new(),
        max_rel_dev_n_ge_10: None,
        records: recs.len(),
    };
    fit.residuals = recs
        .iter()
        .map(|r| {
            let model = fit.model(r.n as f64);
            FitResidual {
                n: r.n,
                label: r.label.clone(),
                source: r.source,
                data: r.e_corr_hartree,
                model,
                residual: r.e_corr_hartree - model,
                rel_dev: (r.e_corr_hartree - model).abs() / r.e_corr_hartree.abs().max(1e-300),
            }
        })
        .collect();
    fit.max_rel_dev_n_ge_10 =
        fit.residuals.iter().filter(|r| r.n >= 10).map(|r| r.rel_dev).reduce(f64::max);
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitGroup {
    /// `exp`, `ext-hf` or `joint`.
    pub subset: String,
    pub fits: Vec<FitResult>,
    /// Convention with the smaller deviation at `n ≥ 10`.
    pub best: SlopeConvention,
}

/// Fits each source and the joint table under both conventions. Subsets with
/// fewer than three records are skipped.
pub fn fit_all(ds: &CorrelationDataset, theory_slope: f64) -> Result<Vec<FitGroup>> {
    let mut subsets: Vec<(String, CorrelationDataset)> =
        ds.sources().into_iter().map(|s| (s.tag().to_string(), ds.filter_source(s))).collect();
    subsets.push(("joint".into(), ds.clone()));
    let mut out = Vec::new();
    for (name, sub) in subsets {
        if sub.len() < 3 {
            continue;
        }
        let fits = [SlopeConvention::PerLnN, SlopeConvention::PerLnNCubeRoot]
            .into_iter()
            .map(|c| fit_offset(&sub, c, theory_slope))
            .collect::<Result<Vec<_>>>()?;
        let score = |f: &FitResult| f.max_rel_dev_n_ge_10.unwrap_or(f64::INFINITY);
        let best = if score(&fits[1]) < score(&fits[0]) { fits[1].slope_convention } else { fits[0].slope_convention };
        out.push(FitGroup { subset: name, fits, best });
    }
    if out.is_empty() {
        return Err(Error::invalid("no subset has at least 3 records"));
    }
    Ok(out)
}

/// Figure-style plot data, columns `n,model,data`.
pub fn plot_data_csv(fit: &FitResult) -> String {
    let mut out = String::from("n,model,data\n");
    for r in &fit.residuals {
        out.push_str(&format!("{},{},{}\n", r.n, fmt17(r.model), fmt17(r.data)));
    }
    out
}

/// Noise-free table from the model, for tests and demonstrations.
pub fn synthetic_dataset(
    ns: &[u32],
    conv: SlopeConvention,
    slope: f64,
    c_prime: f64,
    source: Source,
) -> Result<CorrelationDataset> {
    let recs = ns
        .iter()
        .map(|&n| {
            let nf = n as f64;
            CorrelationRecord {
                n,
                label: format!("syn{n}"),
                e_corr_hartree: nf * (-slope * log_term(conv, nf) + c_prime),
                source,
            }
        })
        .collect();
    CorrelationDataset::new(recs)
}
