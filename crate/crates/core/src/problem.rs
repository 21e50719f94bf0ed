//! Recovery problem instances and recovery maps.

use std::fmt;
use std::ops::Range;

use crate::chebyshev::{self, check_distinct, ChebMoments, FunctionalSpec};
use crate::conic::{AffineExpr, ConicBuilder, ConicSolution, SolveStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelType {
    /// `dist(f, V) ≤ ε` and `‖f‖ ≤ κ`.
    Type1,
    /// `f = v + h` with `v ∈ V`, `‖v‖ ≤ κ`, `‖h‖ ≤ ε`.
    Type2,
}

impl ModelType {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelType::Type1 => "type1",
            ModelType::Type2 => "type2",
        }
    }
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    Finite(f64),
    Infinite,
}

impl Kappa {
    pub fn finite(self) -> Option<f64> {
        match self {
            Kappa::Finite(k) => Some(k),
            Kappa::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Kappa::Infinite
    }

    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    PointEvaluation(f64),
    NormalizedIntegral,
}

impl Quantity {
    pub fn functional(self) -> FunctionalSpec {
        match self {
            Quantity::PointEvaluation(x) => FunctionalSpec::PointEvaluation(x),
            Quantity::NormalizedIntegral => FunctionalSpec::NormalizedIntegral,
        }
    }

    pub fn point(self) -> Option<f64> {
        match self {
            Quantity::PointEvaluation(x) => Some(x),
            Quantity::NormalizedIntegral => None,
        }
    }
}

/// Exponent `p` of the observation-error ball `‖e‖_p ≤ η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseNorm {
    One,
    Two,
    Infinity,
}

impl NoiseNorm {
    /// `‖a‖_{p′}` with `p′` the conjugate exponent.
    pub fn conjugate_norm(self, a: &[f64]) -> f64 {
        match self {
            NoiseNorm::One => a.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            NoiseNorm::Two => a.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NoiseNorm::Infinity => a.iter().map(|v| v.abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p: NoiseNorm,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub model: ModelType,
    /// Dimension of `V = P_n`.
    pub n: usize,
    pub epsilon: f64,
    pub kappa: Kappa,
    pub points: Vec<f64>,
    pub quantity: Quantity,
    pub noise: Option<NoiseModel>,
}

impl ProblemSpec {
    pub fn new(model: ModelType, n: usize, epsilon: f64, kappa: Kappa, points: Vec<f64>, quantity: Quantity) -> Result<Self> {
        let spec = ProblemSpec {
            model,
            n,
            epsilon,
            kappa,
            points,
            quantity,
            noise: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Result<Self> {
        self.noise = Some(noise);
        self.validate()?;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Noise level, zero when no noise model is set.
    pub fn eta(&self) -> f64 {
        self.noise.map_or(0.0, |nm| nm.eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be positive and finite, got {}", self.epsilon)));
        }
        if let Kappa::Finite(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::invalid("kappa", format!("must be positive, got {k}")));
            }
        }
        if self.points.is_empty() {
            return Err(Error::invalid("points", "at least one observation point is required"));
        }
        for &x in &self.points {
            if !(x.abs() <= 1.0) {
                return Err(Error::invalid("points", format!("{x} lies outside [-1, 1]")));
            }
        }
        check_distinct(&self.points, "points")?;
        if let Quantity::PointEvaluation(x0) = self.quantity {
            if !(x0.abs() <= 1.0) {
                return Err(Error::invalid("x0", format!("{x0} lies outside [-1, 1]")));
            }
            if self.points.contains(&x0) {
                return Err(Error::invalid("x0", format!("{x0} coincides with an observation point")));
            }
        }
        if let Some(nm) = self.noise {
            if !(nm.eta >= 0.0 && nm.eta.is_finite()) {
                return Err(Error::invalid("eta", format!("must be nonnegative and finite, got {}", nm.eta)));
            }
        }
        Ok(())
    }

    /// `b_j = Q(T_{j−1})`, `j = 1..len`.
    pub fn quantity_moments(&self, len: usize) -> Result<ChebMoments> {
        chebyshev::moments(&self.quantity.functional(), len)
    }

    /// Column `i` holds `T_0(x_i), …, T_{len−1}(x_i)`.
    pub fn observation_moments(&self, len: usize) -> Result<Vec<Vec<f64>>> {
        self.points.iter().map(|&x| chebyshev::cheb_values(x, len)).collect()
    }

    /// `‖Q − Σ aᵢ δ_{xᵢ}‖` in the dual of `C[-1,1]`. Both supported quantities
    /// are unit-mass measures singular to the atoms at the observation
    /// points, so the total variations add up to `1 + Σ|aᵢ|`.
    pub fn dual_norm(&self, a: &[f64]) -> f64 {
        1.0 + a.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// The same instance with `(ε, κ, η)` multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut s = self.clone();
        s.epsilon *= t;
        if let Kappa::Finite(k) = s.kappa {
            s.kappa = Kappa::Finite(k * t);
        }
        if let Some(nm) = &mut s.noise {
            nm.eta *= t;
        }
        s
    }
}

/// Convergence diagnostics of the conic solve that produced a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDiagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub dual_objective: f64,
}

impl From<&ConicSolution> for SolveDiagnostics {
    fn from(s: &ConicSolution) -> Self {
        SolveDiagnostics {
            status: s.status,
            iterations: s.iterations,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
            gap: s.gap,
            dual_objective: s.dual_objective,
        }
    }
}

/// A linear recovery map `y ↦ Σ aᵢ yᵢ` with its certified worst-case error.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryWeights {
    pub weights: Vec<f64>,
    pub certified_value: f64,
    pub model: ModelType,
    pub diagnostics: SolveDiagnostics,
    pub warnings: Vec<String>,
}

impl RecoveryWeights {
    pub fn apply(&self, y: &[f64]) -> f64 {
        self.weights.iter().zip(y).map(|(a, y)| a * y).sum()
    }
}

pub(crate) fn require_optimal(sol: &ConicSolution) -> Result<()> {
    if sol.status == SolveStatus::Optimal {
        Ok(())
    } else {
        Err(Error::Solver { status: sol.status })
    }
}

/// Adds `η‖a‖_{p′}` to the objective of `b`. `abs_slacks`, when given, are
/// variables already constrained by `sᵢ ≥ |aᵢ|` and are reused for `p′ = 1`.
pub(crate) fn add_noise_term(b: &mut ConicBuilder, a: Range<usize>, abs_slacks: Option<Range<usize>>, noise: Option<NoiseModel>) {
    let Some(NoiseModel { p, eta }) = noise else {
        return;
    };
    if eta == 0.0 {
        return;
    }
    match p {
        NoiseNorm::Infinity => {
            let s = abs_slacks.unwrap_or_else(|| add_abs_slacks(b, a.clone()));
            for v in s {
                b.add_cost(v, eta);
            }
        }
        NoiseNorm::One => {
            let t = b.add_vars(1).start;
            b.add_cost(t, eta);
            let mut rows = Vec::with_capacity(2 * a.len());
            for i in a {
                rows.push(AffineExpr::var(t).term(i, 1.0));
                rows.push(AffineExpr::var(t).term(i, -1.0));
            }
            b.add_nonneg(rows);
        }
        NoiseNorm::Two => {
            let t = b.add_vars(1).start;
            b.add_cost(t, eta);
            let mut rows = vec![AffineExpr::var(t)];
            rows.extend(a.map(AffineExpr::var));
            b.add_soc(rows);
        }
    }
}

/// New variables `sᵢ` with `sᵢ ± aᵢ ≥ 0`.
pub(crate) fn add_abs_slacks(b: &mut ConicBuilder, a: Range<usize>) -> Range<usize> {
    let s = b.add_vars(a.len());
    let mut rows = Vec::with_capacity(2 * a.len());
    for (si, ai) in s.clone().zip(a) {
        rows.push(AffineExpr::var(si).term(ai, 1.0));
        rows.push(AffineExpr::var(si).term(ai, -1.0));
    }
    b.add_nonneg(rows);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ProblemSpec {
        ProblemSpec::new(ModelType::Type2, 1, 0.1, Kappa::Finite(1.0), vec![0.0], Quantity::PointEvaluation(0.5)).unwrap()
    }

    #[test]
    fn validation() {
        let s = base();
        assert!(ProblemSpec { n: 0, ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { epsilon: 0.0, ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { kappa: Kappa::Finite(-1.0), ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { points: vec![], ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { points: vec![0.2, 0.2], ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { points: vec![1.5], ..s.clone() }.validate().is_err());
        assert!(ProblemSpec { quantity: Quantity::PointEvaluation(0.0), ..s.clone() }.validate().is_err());
        assert!(s.clone().with_noise(NoiseModel { p: NoiseNorm::Two, eta: -1.0 }).is_err());
        assert!(ProblemSpec { n: 5, kappa: Kappa::Infinite, ..s }.validate().is_ok());
    }

    #[test]
    fn conjugate_norms() {
        let a = [3.0, -4.0];
        assert_eq!(NoiseNorm::One.conjugate_norm(&a), 4.0);
        assert_eq!(NoiseNorm::Two.conjugate_norm(&a), 5.0);
        assert_eq!(NoiseNorm::Infinity.conjugate_norm(&a), 7.0);
    }

    #[test]
    fn dual_norm_formula() {
        let s = base();
        assert_eq!(s.dual_norm(&[0.0]), 1.0);
        assert_eq!(s.dual_norm(&[1.0]), 2.0);
        assert_eq!(s.dual_norm(&[0.5, -0.5]), 2.0);
    }
}
