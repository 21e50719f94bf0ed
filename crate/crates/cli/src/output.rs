//! Result documents and their JSON encoding.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use optrec::problem::SolveDiagnostics;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;
use crate::spec_file::SpecFile;

/// Pretty JSON with every float written to 17 significant digits.
struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("result documents serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes to `path`, or to standard output without one.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub program: String,
    pub status: String,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl SolveReport {
    pub fn new(program: &str, d: &SolveDiagnostics) -> Self {
        SolveReport {
            program: program.into(),
            status: d.status.as_str().into(),
            iterations: d.iterations,
            primal_residual: d.primal_residual,
            dual_residual: d.dual_residual,
            gap: d.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSummary {
    pub tolerance: f64,
    pub solves: Vec<SolveReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichFields {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gap: Option<f64>,
    #[serde(rename = "N")]
    pub truncation: usize,
    #[serde(rename = "K")]
    pub grid_size: usize,
    /// Weights of the truncated program.
    pub lower_weights: Vec<f64>,
    pub ordered: bool,
    pub upper_unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSummary {
    pub samples: usize,
    pub empirical_error: f64,
    pub dual_norm: f64,
    /// Bounds on the worst-case error of the weights (second type only).
    pub worst_case_lower: Option<f64>,
    pub worst_case_upper: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verification {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub spec: SpecFile,
    pub status: String,
    pub weights: Vec<f64>,
    /// Certified worst-case error of `weights`; absent when no upper bound
    /// could be computed.
    pub certified_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichFields>,
    pub oracle: OracleSummary,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub solver: SolverSummary,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRowFile {
    #[serde(rename = "N")]
    pub truncation: usize,
    #[serde(rename = "K")]
    pub grid_size: usize,
    pub grid_points: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gap: Option<f64>,
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceFile {
    pub spec: SpecFile,
    pub tolerance: f64,
    pub rows: Vec<ConvergenceRowFile>,
    pub alpha_nondecreasing: bool,
    pub beta_nonincreasing: bool,
    pub diagnostics: Vec<String>,
    pub upper_unavailable: Option<String>,
    pub wall_clock_seconds: f64,
}

impl ConvergenceFile {
    /// Right-aligned columns, `-` for missing values.
    pub fn table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.10e}"));
        let mut out = format!("{:>6} {:>6} {:>8} {:>18} {:>18} {:>18} {:>18}\n", "N", "K", "points", "alpha", "beta", "gap", "drift");
        for r in &self.rows {
            out += &format!(
                "{:>6} {:>6} {:>8} {:>18} {:>18} {:>18} {:>18}\n",
                r.truncation,
                r.grid_size,
                r.grid_points,
                format!("{:.10e}", r.alpha),
                opt(r.beta),
                opt(r.gap),
                opt(r.drift)
            );
        }
        out
    }
}
