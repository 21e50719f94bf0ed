//! Conic programs over products of nonnegative orthants, second-order cones
//! and PSD cones, together with an interior-point solver.
//!
//! Problems are stored in the affine form
//!
//! ```text
//! minimize    cᵀx + offset
//! subject to  A x = b
//!             h − G x ∈ K₁ × … × K_r
//! ```
//!
//! Each cone block owns a contiguous range of rows of `G`. PSD blocks use
//! packed lower-triangular storage with off-diagonal entries scaled by √2.

pub mod cones;
mod ipm;
mod kkt;
mod presolve;
pub mod sparse;

use std::f64::consts::SQRT_2;
use std::io::{self, Write};
use std::ops::Range;

use crate::error::{Error, Result};
use sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-2;
const MAX_ITER: usize = 100;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    Nonnegative,
    SecondOrder,
    /// Symmetric `d × d` matrices, `d(d+1)/2` packed rows.
    Psd(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub rows: Range<usize>,
}

/// `Σ coef·x[var] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn var(v: usize) -> Self {
        AffineExpr {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        AffineExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(mut self, v: usize, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn plus(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn scale(mut self, t: f64) -> Self {
        self.terms.iter_mut().for_each(|(_, c)| *c *= t);
        self.constant *= t;
        self
    }

    pub fn add(mut self, other: &AffineExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    num_vars: usize,
    objective: Vec<f64>,
    objective_offset: f64,
    eq: CsrMatrix,
    eq_rhs: Vec<f64>,
    cone: CsrMatrix,
    cone_rhs: Vec<f64>,
    blocks: Vec<ConeBlock>,
}

impl ConicProblem {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn equalities(&self) -> (&CsrMatrix, &[f64]) {
        (&self.eq, &self.eq_rhs)
    }

    pub fn cone_constraints(&self) -> (&CsrMatrix, &[f64]) {
        (&self.cone, &self.cone_rhs)
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn has_nonlinear_cones(&self) -> bool {
        self.blocks.iter().any(|b| b.kind != ConeKind::Nonnegative)
    }

    /// Checks dimensions and that cone blocks tile the rows of `G` in order.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedProblem(msg));
        if self.objective.len() != self.num_vars {
            return bad(format!("objective has {} entries for {} variables", self.objective.len(), self.num_vars));
        }
        if self.eq.ncols() != self.num_vars || self.cone.ncols() != self.num_vars {
            return bad("constraint matrix column count differs from variable count".into());
        }
        if self.eq.nrows() != self.eq_rhs.len() || self.cone.nrows() != self.cone_rhs.len() {
            return bad("right-hand side length differs from row count".into());
        }
        let mut next = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.rows.start != next {
                return bad(format!("cone block {i} does not start at row {next}"));
            }
            let len = b.rows.len();
            let ok = match b.kind {
                ConeKind::Nonnegative => len >= 1,
                ConeKind::SecondOrder => len >= 1,
                ConeKind::Psd(d) => d >= 1 && len == cones::packed_len(d),
            };
            if !ok {
                return bad(format!("cone block {i} has {len} rows, inconsistent with {:?}", b.kind));
            }
            next = b.rows.end;
        }
        if next != self.cone.nrows() {
            return bad(format!("cone blocks cover {next} of {} rows", self.cone.nrows()));
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.eq_rhs)
            .chain(&self.cone_rhs)
            .chain(std::iter::once(&self.objective_offset))
            .chain(self.eq.triplets().map(|t| t.2).collect::<Vec<_>>().iter())
            .chain(self.cone.triplets().map(|t| t.2).collect::<Vec<_>>().iter())
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite coefficient".into());
        }
        Ok(())
    }

    /// The same problem with variables reordered: new index `perm[j]` holds
    /// old variable `j`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.num_vars];
        if perm.len() != self.num_vars || perm.iter().any(|&p| p >= self.num_vars || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("perm", "not a permutation of the variable indices"));
        }
        let mut objective = vec![0.0; self.num_vars];
        for (j, &p) in perm.iter().enumerate() {
            objective[p] = self.objective[j];
        }
        Ok(ConicProblem {
            objective,
            eq: self.eq.permute_cols(perm),
            cone: self.cone.permute_cols(perm),
            ..self.clone()
        })
    }

    /// Plain-text dump: a header, then one `row col value` line per nonzero
    /// of `A` and of `G`, then the vectors `c`, `b`, `h` as `index value`.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# vars {} eq {} cone {}", self.num_vars, self.eq.nrows(), self.cone.nrows())?;
        for b in &self.blocks {
            writeln!(w, "# block {:?} rows {}..{}", b.kind, b.rows.start, b.rows.end)?;
        }
        writeln!(w, "# offset {:e}", self.objective_offset)?;
        writeln!(w, "A")?;
        for (i, j, v) in self.eq.triplets() {
            writeln!(w, "{i} {j} {v:e}")?;
        }
        writeln!(w, "G")?;
        for (i, j, v) in self.cone.triplets() {
            writeln!(w, "{i} {j} {v:e}")?;
        }
        for (name, vec) in [("c", &self.objective), ("b", &self.eq_rhs), ("h", &self.cone_rhs)] {
            writeln!(w, "{name}")?;
            for (i, v) in vec.iter().enumerate() {
                if *v != 0.0 {
                    writeln!(w, "{i} {v:e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Incremental construction of a [`ConicProblem`].
#[derive(Debug, Clone, Default)]
pub struct ConicBuilder {
    num_vars: usize,
    objective: Vec<f64>,
    offset: f64,
    eq_rows: Vec<Vec<(usize, f64)>>,
    eq_rhs: Vec<f64>,
    cone_rows: Vec<Vec<(usize, f64)>>,
    cone_rhs: Vec<f64>,
    blocks: Vec<ConeBlock>,
}

impl ConicBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_vars(&mut self, count: usize) -> Range<usize> {
        let start = self.num_vars;
        self.num_vars += count;
        self.objective.resize(self.num_vars, 0.0);
        start..self.num_vars
    }

    pub fn add_cost(&mut self, var: usize, coef: f64) {
        self.objective[var] += coef;
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// `expr = 0`.
    pub fn add_equality(&mut self, expr: AffineExpr) {
        self.eq_rows.push(expr.terms);
        self.eq_rhs.push(-expr.constant);
    }

    fn push_block(&mut self, kind: ConeKind, exprs: Vec<AffineExpr>) {
        if exprs.is_empty() {
            return;
        }
        let start = self.cone_rows.len();
        for e in exprs {
            self.cone_rows.push(e.terms.into_iter().map(|(v, c)| (v, -c)).collect());
            self.cone_rhs.push(e.constant);
        }
        self.blocks.push(ConeBlock {
            kind,
            rows: start..self.cone_rows.len(),
        });
    }

    /// Every expression `≥ 0`.
    pub fn add_nonneg(&mut self, exprs: Vec<AffineExpr>) {
        self.push_block(ConeKind::Nonnegative, exprs);
    }

    /// `exprs[0] ≥ ‖exprs[1..]‖₂`.
    pub fn add_soc(&mut self, exprs: Vec<AffineExpr>) {
        self.push_block(ConeKind::SecondOrder, exprs);
    }

    /// The symmetric matrix with lower-triangular entries `entry(i, j)`,
    /// `i ≥ j`, is PSD.
    pub fn add_psd<F: FnMut(usize, usize) -> AffineExpr>(&mut self, d: usize, mut entry: F) {
        let mut exprs = Vec::with_capacity(cones::packed_len(d));
        for j in 0..d {
            for i in j..d {
                let e = entry(i, j);
                exprs.push(if i == j { e } else { e.scale(SQRT_2) });
            }
        }
        self.push_block(ConeKind::Psd(d), exprs);
    }

    /// The Toeplitz matrix with `(i, j)` entry `diags[|i − j|]` is PSD.
    pub fn add_toeplitz_psd(&mut self, diags: &[AffineExpr]) {
        self.add_psd(diags.len(), |i, j| diags[i - j].clone());
    }

    pub fn build(self) -> ConicProblem {
        ConicProblem {
            num_vars: self.num_vars,
            eq: CsrMatrix::from_rows(self.num_vars, &self.eq_rows),
            eq_rhs: self.eq_rhs,
            cone: CsrMatrix::from_rows(self.num_vars, &self.cone_rows),
            cone_rhs: self.cone_rhs,
            objective: self.objective,
            objective_offset: self.offset,
            blocks: self.blocks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver output. For `Infeasible`, `y` and `z` hold a Farkas certificate
/// normalized so that `bᵀy + hᵀz = −1`; for `Unbounded`, `x` and `s` hold an
/// improving ray with `cᵀx = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows.
    pub y: Vec<f64>,
    /// Multipliers of the cone rows.
    pub z: Vec<f64>,
    /// Cone slacks `h − Gx`.
    pub s: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Values of the variables in `range`.
    pub fn slice(&self, range: Range<usize>) -> Vec<f64> {
        self.x[range].to_vec()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::invalid("tol", format!("{tol} outside [{MIN_TOL}, {MAX_TOL}]")));
    }
    Ok(())
}

/// Solves `p` to relative tolerance `tol`.
pub fn solve(p: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    check_tol(tol)?;
    p.validate()?;
    let reduction = presolve::reduce_rows(&p.eq, &p.eq_rhs, RANK_TOL);
    if !reduction.dropped.is_empty() {
        log::info!("dropped {} linearly dependent equality row(s): {:?}", reduction.dropped.len(), reduction.dropped);
    }
    if !reduction.consistent {
        log::info!("equality constraints are inconsistent");
        return Ok(ConicSolution {
            status: SolveStatus::Infeasible,
            x: vec![0.0; p.num_vars],
            y: vec![0.0; p.eq.nrows()],
            z: vec![0.0; p.cone.nrows()],
            s: vec![0.0; p.cone.nrows()],
            objective: f64::INFINITY,
            dual_objective: f64::INFINITY,
            primal_residual: f64::INFINITY,
            dual_residual: 0.0,
            gap: f64::INFINITY,
            iterations: 0,
        });
    }
    let a = p.eq.select_rows(&reduction.kept);
    let b: Vec<f64> = reduction.kept.iter().map(|&i| p.eq_rhs[i]).collect();
    let data = ipm::Data::new(p.objective.clone(), a, b, p.cone.clone(), p.cone_rhs.clone(), p.blocks.clone());
    log::debug!("conic solve: {} variables, {} equalities, {} cone rows", p.num_vars, reduction.kept.len(), p.cone.nrows());
    let raw = ipm::run(&data, tol, MAX_ITER);
    log::debug!(
        "conic solve: {} after {} iterations (pres {:.1e}, dres {:.1e}, gap {:.1e})",
        raw.status,
        raw.iterations,
        raw.primal_residual,
        raw.dual_residual,
        raw.gap
    );
    let mut y = vec![0.0; p.eq.nrows()];
    for (k, &i) in reduction.kept.iter().enumerate() {
        y[i] = raw.y[k];
    }
    Ok(ConicSolution {
        status: raw.status,
        x: raw.x,
        y,
        z: raw.z,
        s: raw.s,
        objective: raw.primal_objective + p.objective_offset,
        dual_objective: raw.dual_objective + p.objective_offset,
        primal_residual: raw.primal_residual,
        dual_residual: raw.dual_residual,
        gap: raw.gap,
        iterations: raw.iterations,
    })
}

/// [`solve`] restricted to problems with only nonnegative cone blocks.
pub fn lp_solve(p: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    if p.has_nonlinear_cones() {
        return Err(Error::MalformedProblem("lp_solve given a problem with second-order or PSD blocks".into()));
    }
    solve(p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_gadget(a_value: f64) -> (ConicProblem, Range<usize>) {
        let mut b = ConicBuilder::new();
        let s = b.add_vars(1);
        let a = b.add_vars(1);
        b.add_cost(s.start, 1.0);
        b.add_nonneg(vec![
            AffineExpr::var(s.start).term(a.start, 1.0),
            AffineExpr::var(s.start).term(a.start, -1.0),
        ]);
        b.add_equality(AffineExpr::var(a.start).plus(-a_value));
        (b.build(), s)
    }

    #[test]
    fn minimize_nonnegative_variable() {
        let mut b = ConicBuilder::new();
        let x = b.add_vars(1);
        b.add_cost(x.start, 1.0);
        b.add_nonneg(vec![AffineExpr::var(x.start)]);
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective.abs() < 1e-7);
    }

    #[test]
    fn toeplitz_two_by_two() {
        let mut b = ConicBuilder::new();
        let u = b.add_vars(2);
        b.add_cost(u.start, 1.0);
        b.add_equality(AffineExpr::var(u.start + 1).plus(-1.0));
        b.add_toeplitz_psd(&[AffineExpr::var(u.start), AffineExpr::var(u.start + 1)]);
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn absolute_value_gadget() {
        let (p, s) = abs_gadget(3.0);
        let sol = solve(&p, DEFAULT_TOL).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.x[s.start] - 3.0).abs() < 1e-6);
        let (p, _) = abs_gadget(-2.0);
        let sol = lp_solve(&p, DEFAULT_TOL).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn feasibility_lp() {
        let mut b = ConicBuilder::new();
        let a = b.add_vars(1);
        b.add_equality(AffineExpr::var(a.start).plus(-1.0));
        let sol = lp_solve(&b.build(), DEFAULT_TOL).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective.abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn second_order_cone() {
        // minimize t subject to t ≥ ‖(x − 3, y + 4)‖ → 5 at x = y = 0 … free
        // variables pinned by equalities.
        let mut b = ConicBuilder::new();
        let v = b.add_vars(3);
        b.add_cost(v.start, 1.0);
        b.add_equality(AffineExpr::var(v.start + 1));
        b.add_equality(AffineExpr::var(v.start + 2));
        b.add_soc(vec![
            AffineExpr::var(v.start),
            AffineExpr::var(v.start + 1).plus(-3.0),
            AffineExpr::var(v.start + 2).plus(4.0),
        ]);
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 5.0).abs() < 1e-6);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut b = ConicBuilder::new();
        let x = b.add_vars(1);
        b.add_cost(x.start, 1.0);
        b.add_nonneg(vec![AffineExpr::var(x.start).plus(-1.0), AffineExpr::var(x.start).scale(-1.0)]);
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);

        let mut b = ConicBuilder::new();
        let x = b.add_vars(1);
        b.add_cost(x.start, -1.0);
        b.add_nonneg(vec![AffineExpr::var(x.start)]);
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);

        let mut b = ConicBuilder::new();
        let x = b.add_vars(2);
        b.add_equality(AffineExpr::var(x.start).term(x.start + 1, 1.0).plus(-1.0));
        b.add_equality(AffineExpr::var(x.start).term(x.start + 1, 1.0).plus(-2.0));
        let sol = solve(&b.build(), DEFAULT_TOL).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_bad_input() {
        let (p, _) = abs_gadget(1.0);
        assert!(solve(&p, 1e-13).is_err());
        assert!(solve(&p, 0.1).is_err());
        let mut b = ConicBuilder::new();
        let x = b.add_vars(1);
        b.add_soc(vec![AffineExpr::var(x.start)]);
        assert!(lp_solve(&b.build(), DEFAULT_TOL).is_err());
    }

    #[test]
    fn triplet_dump() {
        let (p, _) = abs_gadget(3.0);
        let mut out = Vec::new();
        p.write_triplets(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\nA\n0 1 1e0\n"));
        assert!(text.lines().any(|l| l == "1 1 1e0"));
    }
}
