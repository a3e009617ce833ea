//! Convergence reports: per-parameter eigenvalue records, fitted remainder
//! exponents, and pass/fail check lines, serialized deterministically to
//! CSV or JSON. Both formats round-trip bit-for-bit; floats are printed in
//! Rust's shortest form that parses back to the same bits.

use serde::{Deserialize, Serialize};

/// One eigenvalue at one parameter value by one method. `h` doubles as the
/// generic sweep parameter (truncation length for the 1D model, radius for
/// the disc shooter); `gamma` = −h^{−1/2} whenever that conversion applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub h: f64,
    pub gamma: f64,
    pub n: usize,
    pub method: String,
    pub value: f64,
    pub residual: f64,
}

/// Least-squares slope of log|remainder| against log h. `ci` is the
/// two-sigma half width from the residual scatter of the kept points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub exponent: f64,
    pub ci: f64,
    pub log_prefactor: f64,
    /// largest-h point discarded as an outlier
    pub dropped_point: bool,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// curve spec as given, for the environment stamp
    pub curve: String,
    pub seed: u64,
    pub version: String,
    pub records: Vec<EigenRecord>,
    pub fits: Vec<FitSummary>,
    pub checks: Vec<CheckLine>,
}

impl ConvergenceReport {
    pub fn new(curve: impl Into<String>, seed: u64) -> Self {
        ConvergenceReport {
            curve: curve.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            records: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn push_check(&mut self, name: &str, observed: f64, target: f64, tol: f64) {
        self.checks.push(CheckLine {
            name: name.to_string(),
            observed,
            target,
            tol,
            pass: (observed - target).abs() <= tol,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

pub fn emit(report: &ConvergenceReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => emit_csv(report),
    }
}

/// Plot-ready CSV: one data row per (h, n, method). Metadata, fits, and
/// checks travel in `#`-prefixed lines so the file still round-trips.
fn emit_csv(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# robinspec v={} seed={} curve={}\n",
        report.version, report.seed, report.curve
    ));
    for f in &report.fits {
        out.push_str(&format!(
            "# fit {} {} {} {} {} {}\n",
            f.name, f.exponent, f.ci, f.log_prefactor, f.dropped_point, f.points
        ));
    }
    for c in &report.checks {
        out.push_str(&format!(
            "# check {} {} {} {} {}\n",
            c.name, c.observed, c.target, c.tol, c.pass
        ));
    }
    out.push_str("h,gamma,n,method,value,residual\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.h, r.gamma, r.n, r.method, r.value, r.residual
        ));
    }
    out
}

pub fn parse_json(text: &str) -> Result<ConvergenceReport, CliParseError> {
    serde_json::from_str(text).map_err(|e| CliParseError(e.to_string()))
}

#[derive(Debug, thiserror::Error)]
#[error("report parse: {0}")]
pub struct CliParseError(String);

fn bad(line: &str) -> CliParseError {
    CliParseError(format!("malformed line {line:?}"))
}

pub fn parse_csv(text: &str) -> Result<ConvergenceReport, CliParseError> {
    let mut report = ConvergenceReport::new("", 0);
    let mut saw_header = false;
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# robinspec v=") {
            let (version, rest) = meta.split_once(' ').ok_or_else(|| bad(line))?;
            let rest = rest.strip_prefix("seed=").ok_or_else(|| bad(line))?;
            let (seed, rest) = rest.split_once(' ').ok_or_else(|| bad(line))?;
            report.version = version.to_string();
            report.seed = seed.parse().map_err(|_| bad(line))?;
            report.curve = rest.strip_prefix("curve=").ok_or_else(|| bad(line))?.to_string();
        } else if let Some(fit) = line.strip_prefix("# fit ") {
            let parts: Vec<&str> = fit.split(' ').collect();
            if parts.len() != 6 {
                return Err(bad(line));
            }
            report.fits.push(FitSummary {
                name: parts[0].to_string(),
                exponent: parts[1].parse().map_err(|_| bad(line))?,
                ci: parts[2].parse().map_err(|_| bad(line))?,
                log_prefactor: parts[3].parse().map_err(|_| bad(line))?,
                dropped_point: parts[4].parse().map_err(|_| bad(line))?,
                points: parts[5].parse().map_err(|_| bad(line))?,
            });
        } else if let Some(check) = line.strip_prefix("# check ") {
            let parts: Vec<&str> = check.split(' ').collect();
            if parts.len() != 5 {
                return Err(bad(line));
            }
            report.checks.push(CheckLine {
                name: parts[0].to_string(),
                observed: parts[1].parse().map_err(|_| bad(line))?,
                target: parts[2].parse().map_err(|_| bad(line))?,
                tol: parts[3].parse().map_err(|_| bad(line))?,
                pass: parts[4].parse().map_err(|_| bad(line))?,
            });
        } else if line == "h,gamma,n,method,value,residual" {
            saw_header = true;
        } else if !line.is_empty() {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(bad(line));
            }
            report.records.push(EigenRecord {
                h: parts[0].parse().map_err(|_| bad(line))?,
                gamma: parts[1].parse().map_err(|_| bad(line))?,
                n: parts[2].parse().map_err(|_| bad(line))?,
                method: parts[3].to_string(),
                value: parts[4].parse().map_err(|_| bad(line))?,
                residual: parts[5].parse().map_err(|_| bad(line))?,
            });
        }
    }
    if !saw_header {
        return Err(CliParseError("missing column header".to_string()));
    }
    Ok(report)
}
