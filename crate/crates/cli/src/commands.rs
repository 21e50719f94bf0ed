use std::path::{Path, PathBuf};
use std::time::Instant;

use optrec::conic::DEFAULT_TOL;
use optrec::model_type1::{certify_weights_upper, convergence_study, default_truncation_schedule, exclusion_grid, sandwich};
use optrec::model_type2::solve_type2;
use optrec::oracle::{empirical_error, sample_many, worst_case_type2, SampledFunction, SamplerConfig};
use optrec::problem::{ModelType, ProblemSpec};

use crate::error::CliError;
use crate::output::{
    emit, to_json, Check, ConvergenceFile, ConvergenceRowFile, OracleSummary, ResultFile, SandwichFields, SolveReport, SolverSummary,
    Verification,
};
use crate::spec_file::{check_tolerance, parse_json, read_text, SpecFile};

pub const DEFAULT_GRID_SIZE: usize = 128;
pub const DEFAULT_SAMPLES: usize = 1000;
/// Slack of every oracle comparison.
const ORACLE_SLACK: f64 = 1e-6;

pub fn default_truncation(spec: &ProblemSpec) -> usize {
    (4 * spec.n).max(spec.m())
}

fn resolve_tolerance(flag: Option<f64>, file: &SpecFile) -> Result<f64, CliError> {
    let tol = flag.or(file.tolerance).unwrap_or(DEFAULT_TOL);
    check_tolerance(tol)?;
    Ok(tol)
}

pub struct SolveArgs {
    pub spec: PathBuf,
    pub tol: Option<f64>,
    pub truncation: Option<usize>,
    pub grid_size: Option<usize>,
    pub out: Option<PathBuf>,
    pub samples: usize,
    pub seed: u64,
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let file = SpecFile::load(&args.spec)?;
    let spec = file.problem()?;
    let tol = resolve_tolerance(args.tol, &file)?;
    let samples = sample_many(&spec, args.seed, args.samples, SamplerConfig::default());
    let mut result = match spec.model {
        ModelType::Type2 => solve_second_type(file, &spec, tol, &samples)?,
        ModelType::Type1 => {
            let truncation = args.truncation.or(file.truncation).unwrap_or_else(|| default_truncation(&spec));
            let grid_size = args.grid_size.or(file.grid_size).unwrap_or(DEFAULT_GRID_SIZE);
            if truncation == 0 || grid_size == 0 {
                return Err(CliError::Spec("invalid argument `N`/`K`: must be positive".into()));
            }
            solve_first_type(file, &spec, tol, truncation, grid_size, &samples)?
        }
    };
    result.seed = args.seed;
    if !result.oracle.passed {
        let msg = "oracle cross-check failed; run `verify` for details".to_string();
        log::warn!("{msg}");
        result.warnings.push(msg);
    }
    result.wall_clock_seconds = start.elapsed().as_secs_f64();
    log::info!("solved in {:.3} s", result.wall_clock_seconds);
    emit(&to_json(&result), args.out.as_deref())
}

fn solve_second_type(file: SpecFile, spec: &ProblemSpec, tol: f64, samples: &[SampledFunction]) -> Result<ResultFile, CliError> {
    let r = solve_type2(spec, tol)?;
    let empirical = empirical_error(&r.weights, samples, spec);
    let worst = worst_case_type2(&r.weights, spec)?;
    let passed = empirical <= r.certified_value + ORACLE_SLACK && worst.contains(r.certified_value, ORACLE_SLACK);
    Ok(ResultFile {
        spec: file,
        status: r.diagnostics.status.as_str().into(),
        oracle: OracleSummary {
            samples: samples.len(),
            empirical_error: empirical,
            dual_norm: spec.dual_norm(&r.weights),
            worst_case_lower: Some(worst.lower),
            worst_case_upper: Some(worst.upper),
            passed,
        },
        weights: r.weights,
        certified_value: Some(r.certified_value),
        sandwich: None,
        seed: 0,
        wall_clock_seconds: 0.0,
        solver: SolverSummary {
            tolerance: tol,
            solves: vec![SolveReport::new("type2", &r.diagnostics)],
        },
        warnings: r.warnings,
        verification: None,
    })
}

fn solve_first_type(
    file: SpecFile,
    spec: &ProblemSpec,
    tol: f64,
    truncation: usize,
    grid_size: usize,
    samples: &[SampledFunction],
) -> Result<ResultFile, CliError> {
    let r = sandwich(spec, truncation, grid_size, tol)?;
    let weights = r.a_t.clone().unwrap_or_else(|| r.a_n.clone());
    let empirical = empirical_error(&weights, samples, spec);
    let passed = r.ordered && r.beta_t.is_none_or(|b| empirical <= b + ORACLE_SLACK);
    let mut solves = vec![SolveReport::new("lower", &r.lower_diagnostics)];
    solves.extend(r.upper_diagnostics.as_ref().map(|d| SolveReport::new("upper", d)));
    let mut warnings = r.warnings;
    if let Some(why) = &r.upper_unavailable {
        warnings.push(why.clone());
    }
    Ok(ResultFile {
        spec: file,
        status: r.lower_diagnostics.status.as_str().into(),
        oracle: OracleSummary {
            samples: samples.len(),
            empirical_error: empirical,
            dual_norm: spec.dual_norm(&weights),
            worst_case_lower: None,
            worst_case_upper: None,
            passed,
        },
        weights,
        certified_value: r.beta_t,
        sandwich: Some(SandwichFields {
            alpha: r.alpha_n,
            beta: r.beta_t,
            gap: r.gap,
            truncation,
            grid_size,
            lower_weights: r.a_n,
            ordered: r.ordered,
            upper_unavailable: r.upper_unavailable,
        }),
        seed: 0,
        wall_clock_seconds: 0.0,
        solver: SolverSummary { tolerance: tol, solves },
        warnings,
        verification: None,
    })
}

pub struct VerifyArgs {
    pub result: PathBuf,
    pub samples: usize,
    pub seed: Option<u64>,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut result: ResultFile = parse_json(&read_text(&args.result)?, &args.result)?;
    let spec = result.spec.problem()?;
    let seed = args.seed.unwrap_or(result.seed);
    let mut checks = structural_checks(&result, &spec);
    if args.samples > 0 && checks.iter().all(|c| c.passed) {
        checks.extend(oracle_checks(&result, &spec, args.samples, seed)?);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    for c in &checks {
        log::info!("{}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    result.verification = Some(Verification {
        samples: args.samples,
        seed,
        passed: failed.is_empty(),
        checks,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    });
    emit(&to_json(&result), Some(&args.result))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

fn structural_checks(result: &ResultFile, spec: &ProblemSpec) -> Vec<Check> {
    let mut checks = vec![
        check("status", result.status == "optimal", format!("status {}", result.status)),
        check(
            "weights",
            result.weights.len() == spec.m() && result.weights.iter().all(|w| w.is_finite()),
            format!("{} weights for {} points", result.weights.len(), spec.m()),
        ),
        check(
            "certified value",
            result.certified_value.is_none_or(|v| v.is_finite() && v >= 0.0),
            result.certified_value.map_or("no upper bound".into(), |v| format!("{v:e}")),
        ),
    ];
    if let Some(s) = &result.sandwich {
        let slack = 2.0 * result.solver.tolerance;
        checks.push(check(
            "sandwich ordering",
            s.beta.is_none_or(|b| s.alpha <= b + slack),
            format!("alpha {:e}, beta {:?}", s.alpha, s.beta),
        ));
    }
    checks
}

fn oracle_checks(result: &ResultFile, spec: &ProblemSpec, samples: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let a = &result.weights;
    let mut checks = Vec::new();
    let Some(value) = result.certified_value else {
        return Ok(checks);
    };
    let e = empirical_error(a, &sample_many(spec, seed, samples, SamplerConfig::default()), spec);
    checks.push(check(
        "empirical domination",
        e <= value + ORACLE_SLACK,
        format!("largest sampled error {e:e} against {value:e}"),
    ));
    match spec.model {
        ModelType::Type2 => {
            let b = worst_case_type2(a, spec)?;
            checks.push(check(
                "decomposition",
                b.contains(value, ORACLE_SLACK),
                format!("worst-case error in [{:e}, {:e}], certified {value:e}", b.lower, b.upper),
            ));
        }
        ModelType::Type1 if !spec.kappa.is_infinite() => {
            let k = result.sandwich.as_ref().map_or(DEFAULT_GRID_SIZE, |s| s.grid_size);
            let fixed = certify_weights_upper(spec, a, &exclusion_grid(spec, k)?, result.solver.tolerance)?;
            checks.push(check(
                "fixed-weight grid bound",
                fixed <= value + ORACLE_SLACK,
                format!("grid program at these weights gives {fixed:e}, certified {value:e}"),
            ));
        }
        ModelType::Type1 => {}
    }
    Ok(checks)
}

pub struct ConvergeArgs {
    pub spec: PathBuf,
    pub truncations: Option<Vec<usize>>,
    pub grid_sizes: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn converge(args: &ConvergeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let file = SpecFile::load(&args.spec)?;
    let spec = file.problem()?;
    let tol = resolve_tolerance(args.tol, &file)?;
    let n_list = args.truncations.clone().unwrap_or_else(|| default_truncation_schedule(&spec));
    let k_list = args.grid_sizes.clone().unwrap_or_else(|| {
        let k = file.grid_size.unwrap_or(DEFAULT_GRID_SIZE).max(4);
        vec![k / 4, k / 2, k]
    });
    let table = convergence_study(&spec, &n_list, &k_list, tol)?;
    let doc = ConvergenceFile {
        spec: file,
        tolerance: tol,
        rows: table
            .rows
            .iter()
            .map(|r| ConvergenceRowFile {
                truncation: r.n_trunc,
                grid_size: r.k,
                grid_points: r.grid_size,
                alpha: r.alpha,
                beta: r.beta,
                gap: r.gap,
                drift: r.drift,
            })
            .collect(),
        alpha_nondecreasing: table.alpha_nondecreasing,
        beta_nonincreasing: table.beta_nonincreasing,
        diagnostics: table.diagnostics,
        upper_unavailable: table.upper_unavailable,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    emit_table(&doc, args.out.as_deref())?;
    if doc.alpha_nondecreasing && doc.beta_nonincreasing {
        Ok(())
    } else {
        Err(CliError::NotMonotone(doc.diagnostics.join("; ")))
    }
}

/// JSON to `out` and the text table to stdout, or JSON to stdout and the
/// table to stderr.
fn emit_table(doc: &ConvergenceFile, out: Option<&Path>) -> Result<(), CliError> {
    emit(&to_json(doc), out)?;
    match out {
        Some(_) => emit(&doc.table(), None),
        None => {
            eprint!("{}", doc.table());
            Ok(())
        }
    }
}
