//! Bounded approximability set of the first type.
//!
//! The worst-case error of the best map is
//! `min ε‖μ‖ + κ‖ν‖` over signed measures with `μ + ν = ρ − Σ aᵢδ_{xᵢ}` and
//! `μ ⊥ P_n`. Truncating the Chebyshev moment sequences of the Jordan parts
//! of `μ` and `ν` at level `N` gives a semidefinite lower bound `α^(N)`;
//! restricting the measures to atoms on a grid gives a linear-programming
//! upper bound `β^(t)` whose weights form a near-optimal recovery map.

use std::ops::Range;

use rayon::prelude::*;

use crate::chebyshev::{self, DEFAULT_GRID_TOL};
use crate::conic::{self, AffineExpr, ConicBuilder, ConicProblem};
use crate::error::{Error, Result};
use crate::model_type2::solve_type2_kappa_inf;
use crate::problem::{add_noise_term, require_optimal, ModelType, ProblemSpec, SolveDiagnostics};

/// Slack allowed by monotonicity checks in a convergence study.
pub const MONOTONICITY_SLACK: f64 = 1e-8;
/// Largest truncation level in the default schedule.
pub const MAX_DEFAULT_TRUNCATION: usize = 256;
pub const DEFAULT_GRID_SIZES: [usize; 3] = [64, 128, 256];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedLayout {
    pub a: Range<usize>,
    pub w_plus: Range<usize>,
    pub w_minus: Range<usize>,
    pub z_plus: Range<usize>,
    pub z_minus: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    pub a: Range<usize>,
    pub u: Range<usize>,
    pub v: Range<usize>,
    pub r: Range<usize>,
    pub s: Range<usize>,
}

/// A bound on the intrinsic error together with the weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub weights: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichResult {
    pub alpha_n: f64,
    pub beta_t: Option<f64>,
    pub gap: Option<f64>,
    pub a_n: Vec<f64>,
    pub a_t: Option<Vec<f64>>,
    pub n_trunc: usize,
    pub k: usize,
    pub grid: Vec<f64>,
    /// Why no upper bound was computed, if it was not.
    pub upper_unavailable: Option<String>,
    /// `alpha_n ≤ beta_t + 2·tol`.
    pub ordered: bool,
    pub warnings: Vec<String>,
    pub lower_diagnostics: SolveDiagnostics,
    pub upper_diagnostics: Option<SolveDiagnostics>,
}

fn check_type1(spec: &ProblemSpec) -> Result<()> {
    spec.validate()?;
    if spec.model != ModelType::Type1 {
        return Err(Error::invalid("model", "type-I programs need a type1 spec"));
    }
    Ok(())
}

fn kappa_finite(spec: &ProblemSpec) -> Result<f64> {
    spec.kappa
        .finite()
        .ok_or_else(|| Error::invalid("kappa", "infinite kappa reduces to the exactness-constrained program"))
}

/// The truncated moment program at level `N`.
pub fn assemble_type1_truncated(spec: &ProblemSpec, n_trunc: usize) -> Result<(ConicProblem, TruncatedLayout)> {
    check_type1(spec)?;
    let kappa = kappa_finite(spec)?;
    if n_trunc < spec.n {
        return Err(Error::invalid("N", format!("truncation level {n_trunc} is below n = {}", spec.n)));
    }
    if n_trunc < spec.m() {
        return Err(Error::invalid("N", format!("truncation level {n_trunc} is below m = {}", spec.m())));
    }
    let rho = spec.quantity_moments(n_trunc)?.into_entries();
    let cols = spec.observation_moments(n_trunc)?;

    let mut b = ConicBuilder::new();
    let a = b.add_vars(spec.m());
    let w_plus = b.add_vars(n_trunc);
    let w_minus = b.add_vars(n_trunc);
    let z_plus = b.add_vars(n_trunc);
    let z_minus = b.add_vars(n_trunc);
    b.add_cost(w_plus.start, spec.epsilon);
    b.add_cost(w_minus.start, spec.epsilon);
    b.add_cost(z_plus.start, kappa);
    b.add_cost(z_minus.start, kappa);

    for j in 0..n_trunc {
        let mut e = AffineExpr::var(w_plus.start + j)
            .term(w_minus.start + j, -1.0)
            .term(z_plus.start + j, 1.0)
            .term(z_minus.start + j, -1.0)
            .plus(-rho[j]);
        for (i, col) in cols.iter().enumerate() {
            e = e.term(a.start + i, col[j]);
        }
        b.add_equality(e);
    }
    for j in 0..spec.n {
        b.add_equality(AffineExpr::var(w_plus.start + j).term(w_minus.start + j, -1.0));
    }
    for block in [&w_plus, &w_minus, &z_plus, &z_minus] {
        let diags: Vec<AffineExpr> = block.clone().map(AffineExpr::var).collect();
        b.add_toeplitz_psd(&diags);
    }
    add_noise_term(&mut b, a.clone(), None, spec.noise);
    Ok((
        b.build(),
        TruncatedLayout {
            a,
            w_plus,
            w_minus,
            z_plus,
            z_minus,
        },
    ))
}

fn kappa_inf_bound(spec: &ProblemSpec, tol: f64) -> Result<Bound> {
    let r = solve_type2_kappa_inf(spec, tol)?;
    let mut warnings = r.warnings;
    warnings.push("kappa is infinite: value is exact and both bounds coincide".into());
    Ok(Bound {
        value: r.certified_value,
        weights: r.weights,
        diagnostics: r.diagnostics,
        warnings,
    })
}

/// `α^(N)` and the weight block of the minimizer.
pub fn solve_type1_lower(spec: &ProblemSpec, n_trunc: usize, tol: f64) -> Result<Bound> {
    check_type1(spec)?;
    if spec.kappa.is_infinite() {
        return kappa_inf_bound(spec, tol);
    }
    let (p, layout) = assemble_type1_truncated(spec, n_trunc)?;
    let mut warnings = Vec::new();
    let mm = chebyshev::moment_matrix(&spec.points)?;
    if mm.ill_conditioned {
        let msg = format!(
            "moment matrix of the observation points has condition estimate {:.3e}; weight convergence may be unreliable",
            mm.condition
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let sol = conic::solve(&p, tol)?;
    require_optimal(&sol)?;
    Ok(Bound {
        value: sol.objective.max(0.0),
        weights: sol.slice(layout.a),
        diagnostics: SolveDiagnostics::from(&sol),
        warnings,
    })
}

fn check_grid(spec: &ProblemSpec, grid: &[f64]) -> Result<f64> {
    let x0 = spec
        .quantity
        .point()
        .ok_or_else(|| Error::invalid("quantity", "the grid upper bound needs a point-evaluation quantity"))?;
    if spec.eta() > 0.0 {
        return Err(Error::invalid("noise", "the grid upper bound is not available with observation noise"));
    }
    for &t in grid {
        if !(t.abs() <= 1.0) {
            return Err(Error::invalid("grid", format!("{t} lies outside [-1, 1]")));
        }
        if t == x0 || spec.points.contains(&t) {
            return Err(Error::invalid("grid", format!("{t} coincides with x0 or an observation point")));
        }
    }
    chebyshev::check_distinct(grid, "grid")?;
    Ok(x0)
}

fn build_grid_lp(spec: &ProblemSpec, grid: &[f64], fixed: Option<&[f64]>) -> Result<(ConicProblem, GridLayout)> {
    check_type1(spec)?;
    let kappa = kappa_finite(spec)?;
    let x0 = check_grid(spec, grid)?;
    let n = spec.n;
    let m = spec.m();
    let atoms: Vec<f64> = std::iter::once(x0).chain(spec.points.iter().copied()).chain(grid.iter().copied()).collect();
    let len = atoms.len();
    let values: Vec<Vec<f64>> = atoms.iter().map(|&x| chebyshev::cheb_values(x, n)).collect::<Result<_>>()?;

    let mut b = ConicBuilder::new();
    let a = b.add_vars(m);
    let u = b.add_vars(len);
    let v = b.add_vars(len);
    let r = b.add_vars(len);
    let s = b.add_vars(len);
    for k in 0..len {
        b.add_cost(r.start + k, spec.epsilon);
        b.add_cost(s.start + k, kappa);
    }
    // u + v = [1; −a; 0]
    for k in 0..len {
        let mut e = AffineExpr::var(u.start + k).term(v.start + k, 1.0);
        if k == 0 {
            e = e.plus(-1.0);
        } else if k <= m {
            e = e.term(a.start + k - 1, 1.0);
        }
        b.add_equality(e);
    }
    // μ annihilates P_n.
    for j in 0..n {
        let mut e = AffineExpr::default();
        for (k, vals) in values.iter().enumerate() {
            e = e.term(u.start + k, vals[j]);
        }
        b.add_equality(e);
    }
    let mut rows = Vec::with_capacity(4 * len);
    for k in 0..len {
        rows.push(AffineExpr::var(r.start + k).term(u.start + k, 1.0));
        rows.push(AffineExpr::var(r.start + k).term(u.start + k, -1.0));
        rows.push(AffineExpr::var(s.start + k).term(v.start + k, 1.0));
        rows.push(AffineExpr::var(s.start + k).term(v.start + k, -1.0));
    }
    b.add_nonneg(rows);
    if let Some(w) = fixed {
        if w.len() != m {
            return Err(Error::invalid("weights", format!("expected {m} weights, got {}", w.len())));
        }
        for (i, &wi) in w.iter().enumerate() {
            b.add_equality(AffineExpr::var(a.start + i).plus(-wi));
        }
    }
    Ok((b.build(), GridLayout { a, u, v, r, s }))
}

/// The linear program over atomic measures supported on `{x₀, x₁…x_m} ∪ grid`.
pub fn assemble_grid_lp(spec: &ProblemSpec, grid: &[f64]) -> Result<(ConicProblem, GridLayout)> {
    build_grid_lp(spec, grid, None)
}

/// `β^(t)` and the weights of a near-optimal recovery map.
pub fn solve_type1_upper(spec: &ProblemSpec, grid: &[f64], tol: f64) -> Result<Bound> {
    check_type1(spec)?;
    if spec.kappa.is_infinite() {
        check_grid(spec, grid)?;
        return kappa_inf_bound(spec, tol);
    }
    let (p, layout) = assemble_grid_lp(spec, grid)?;
    let sol = conic::lp_solve(&p, tol)?;
    require_optimal(&sol)?;
    Ok(Bound {
        value: sol.objective.max(0.0),
        weights: sol.slice(layout.a),
        diagnostics: SolveDiagnostics::from(&sol),
        warnings: Vec::new(),
    })
}

/// Upper bound on the worst-case error of the fixed map `y ↦ Σ aᵢyᵢ`,
/// from the grid program with the weights pinned.
pub fn certify_weights_upper(spec: &ProblemSpec, weights: &[f64], grid: &[f64], tol: f64) -> Result<f64> {
    check_type1(spec)?;
    if spec.kappa.is_infinite() {
        return Err(Error::invalid("kappa", "fixed-weight certification needs a finite kappa"));
    }
    let (p, _) = build_grid_lp(spec, grid, Some(weights))?;
    let sol = conic::lp_solve(&p, tol)?;
    require_optimal(&sol)?;
    Ok(sol.objective.max(0.0))
}

/// Grid of `K` Chebyshev points kept away from `x₀` and the observation points.
pub fn exclusion_grid(spec: &ProblemSpec, k: usize) -> Result<Vec<f64>> {
    let mut excl = spec.points.clone();
    if let Some(x0) = spec.quantity.point() {
        excl.push(x0);
    }
    chebyshev::grid(k, &excl, DEFAULT_GRID_TOL)
}

/// Both bounds on the grid `grid` (of nominal size `k`).
pub fn sandwich_with_grid(spec: &ProblemSpec, n_trunc: usize, k: usize, grid: Vec<f64>, tol: f64) -> Result<SandwichResult> {
    check_type1(spec)?;
    let upper_unavailable = if spec.quantity.point().is_none() {
        Some("upper bound unavailable: the grid program needs a point-evaluation quantity".to_string())
    } else if spec.eta() > 0.0 {
        Some("upper bound unavailable: the grid program does not model observation noise".to_string())
    } else {
        None
    };
    let (lower, upper) = if upper_unavailable.is_none() {
        let (l, u) = rayon::join(|| solve_type1_lower(spec, n_trunc, tol), || solve_type1_upper(spec, &grid, tol));
        (l?, Some(u?))
    } else {
        (solve_type1_lower(spec, n_trunc, tol)?, None)
    };
    let mut warnings = lower.warnings.clone();
    let beta = upper.as_ref().map(|u| u.value);
    let upper_diagnostics = upper.as_ref().map(|u| u.diagnostics);
    let ordered = beta.is_none_or(|b| lower.value <= b + 2.0 * tol);
    if !ordered {
        let msg = format!("alpha {} exceeds beta {} beyond solver tolerance", lower.value, beta.unwrap_or(f64::NAN));
        log::warn!("{msg}");
        warnings.push(msg);
    }
    if let Some(u) = &upper {
        warnings.extend(u.warnings.iter().filter(|w| !warnings.contains(w)).cloned().collect::<Vec<_>>());
    }
    Ok(SandwichResult {
        alpha_n: lower.value,
        beta_t: beta,
        gap: beta.map(|b| b - lower.value),
        a_n: lower.weights,
        a_t: upper.map(|u| u.weights),
        n_trunc,
        k,
        grid,
        upper_unavailable,
        ordered,
        warnings,
        lower_diagnostics: lower.diagnostics,
        upper_diagnostics,
    })
}

/// `α^(N) ≤ α^opt ≤ β^(t)` with the grid of `K` points avoiding the data sites.
pub fn sandwich(spec: &ProblemSpec, n_trunc: usize, k: usize, tol: f64) -> Result<SandwichResult> {
    check_type1(spec)?;
    let grid = exclusion_grid(spec, k)?;
    sandwich_with_grid(spec, n_trunc, k, grid, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_trunc: usize,
    pub k: usize,
    /// Number of grid points actually used (the grids are nested unions).
    pub grid_size: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gap: Option<f64>,
    /// `‖a^(N) − a^(N_prev)‖∞` against the previous truncation level.
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub alpha_nondecreasing: bool,
    pub beta_nonincreasing: bool,
    /// Monotonicity violations beyond [`MONOTONICITY_SLACK`].
    pub diagnostics: Vec<String>,
    pub upper_unavailable: Option<String>,
}

fn check_ascending(list: &[usize], field: &'static str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::invalid(field, "list must not be empty"));
    }
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "list must be strictly ascending"));
    }
    Ok(())
}

/// `(n, 2n, 4n, …)` starting at `max(n, m)`, capped at 256.
pub fn default_truncation_schedule(spec: &ProblemSpec) -> Vec<usize> {
    let mut level = spec.n.max(spec.m());
    let mut out = vec![level];
    while level * 2 <= MAX_DEFAULT_TRUNCATION {
        level *= 2;
        out.push(level);
    }
    out
}

/// Lower bounds for every `N` in `n_list`, upper bounds on nested grids
/// (the grid for `K_i` is the union of the Chebyshev grids for
/// `K_1, …, K_i`). Row `i` pairs the `i`-th entries; the shorter list is
/// padded with its last entry.
pub fn convergence_study(spec: &ProblemSpec, n_list: &[usize], k_list: &[usize], tol: f64) -> Result<ConvergenceTable> {
    check_type1(spec)?;
    check_ascending(n_list, "N_list")?;
    check_ascending(k_list, "K_list")?;
    let upper_unavailable = if spec.quantity.point().is_none() {
        Some("upper bound unavailable: the grid program needs a point-evaluation quantity".to_string())
    } else if spec.eta() > 0.0 {
        Some("upper bound unavailable: the grid program does not model observation noise".to_string())
    } else {
        None
    };

    let lowers: Vec<Bound> = n_list
        .par_iter()
        .map(|&n| solve_type1_lower(spec, n, tol))
        .collect::<Result<_>>()?;

    let uppers: Option<Vec<(usize, Bound)>> = if upper_unavailable.is_none() {
        let mut grids = Vec::with_capacity(k_list.len());
        let mut acc: Vec<f64> = Vec::new();
        for &k in k_list {
            for t in exclusion_grid(spec, k)? {
                if !acc.contains(&t) {
                    acc.push(t);
                }
            }
            grids.push(acc.clone());
        }
        Some(
            grids
                .par_iter()
                .map(|g| solve_type1_upper(spec, g, tol).map(|b| (g.len(), b)))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };

    let rows_len = n_list.len().max(k_list.len());
    let mut rows = Vec::with_capacity(rows_len);
    for i in 0..rows_len {
        let li = i.min(n_list.len() - 1);
        let ki = i.min(k_list.len() - 1);
        let lower = &lowers[li];
        let upper = uppers.as_ref().map(|u| &u[ki]);
        let beta = upper.map(|u| u.1.value);
        let drift = (li > 0 && li == i).then(|| {
            lower
                .weights
                .iter()
                .zip(&lowers[li - 1].weights)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        });
        rows.push(ConvergenceRow {
            n_trunc: n_list[li],
            k: k_list[ki],
            grid_size: upper.map_or(0, |u| u.0),
            alpha: lower.value,
            beta,
            gap: beta.map(|b| b - lower.value),
            drift,
        });
    }

    let mut diagnostics = Vec::new();
    let mut alpha_nondecreasing = true;
    for w in lowers.windows(2).zip(n_list.windows(2)) {
        let ((prev, next), ns) = ((&w.0[0], &w.0[1]), w.1);
        if next.value < prev.value - MONOTONICITY_SLACK {
            alpha_nondecreasing = false;
            diagnostics.push(format!(
                "alpha decreased from {} (N={}) to {} (N={}): solver accuracy insufficient",
                prev.value, ns[0], next.value, ns[1]
            ));
        }
    }
    let mut beta_nonincreasing = true;
    if let Some(u) = &uppers {
        for (w, ks) in u.windows(2).zip(k_list.windows(2)) {
            if w[1].1.value > w[0].1.value + MONOTONICITY_SLACK {
                beta_nonincreasing = false;
                diagnostics.push(format!(
                    "beta increased from {} (K={}) to {} (K={}): solver accuracy insufficient",
                    w[0].1.value, ks[0], w[1].1.value, ks[1]
                ));
            }
        }
    }
    for d in &diagnostics {
        log::warn!("{d}");
    }
    Ok(ConvergenceTable {
        rows,
        alpha_nondecreasing,
        beta_nonincreasing,
        diagnostics,
        upper_unavailable,
    })
}
