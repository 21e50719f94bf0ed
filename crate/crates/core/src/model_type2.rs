//! Optimal recovery over the bounded approximability set of the second type.
//!
//! For weights `a` the worst-case error splits as
//! `ε‖Q − Σaᵢδ_{xᵢ}‖ + κ·max_{v ∈ B_{P_n}} |Q(v) − Σaᵢv(xᵢ)|`. The second
//! term is the smallest `u₁` with `Toep(u ± (Ca − b)) ⪰ 0`, which turns the
//! minimization over `a` into a single semidefinite program.

use std::ops::Range;

use crate::conic::{self, AffineExpr, ConicBuilder, ConicProblem};
use crate::error::{Error, Result};
use crate::problem::{add_abs_slacks, add_noise_term, require_optimal, Kappa, ModelType, ProblemSpec, RecoveryWeights, SolveDiagnostics};

/// Variable layout of the type-II program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type2Layout {
    pub a: Range<usize>,
    pub s: Range<usize>,
    pub u: Range<usize>,
}

/// Variables `(a, s, u)`, objective `ε(1 + Σsᵢ) + κ u₁ (+ η‖a‖_{p′})`.
pub fn assemble_type2(spec: &ProblemSpec) -> Result<(ConicProblem, Type2Layout)> {
    spec.validate()?;
    if spec.model != ModelType::Type2 {
        return Err(Error::invalid("model", "type-II assembly needs a type2 spec"));
    }
    let Kappa::Finite(kappa) = spec.kappa else {
        return Err(Error::invalid("kappa", "infinite kappa goes through solve_type2_kappa_inf"));
    };
    let n = spec.n;
    let b = spec.quantity_moments(n)?.into_entries();
    let cols = spec.observation_moments(n)?;

    let mut bld = ConicBuilder::new();
    let a = bld.add_vars(spec.m());
    let s = add_abs_slacks(&mut bld, a.clone());
    let u = bld.add_vars(n);
    for v in s.clone() {
        bld.add_cost(v, spec.epsilon);
    }
    bld.add_cost(u.start, kappa);
    // The atom of Q contributes ε to ε(1 + Σ|aᵢ|).
    bld.add_offset(spec.epsilon);

    // g_j = (Ca − b)_j
    let g: Vec<AffineExpr> = (0..n)
        .map(|j| {
            let mut e = AffineExpr::constant(-b[j]);
            for (i, col) in cols.iter().enumerate() {
                e = e.term(a.start + i, col[j]);
            }
            e
        })
        .collect();
    for sign in [1.0, -1.0] {
        let diags: Vec<AffineExpr> = (0..n).map(|j| AffineExpr::var(u.start + j).add(&g[j].clone().scale(sign))).collect();
        bld.add_toeplitz_psd(&diags);
    }
    add_noise_term(&mut bld, a.clone(), Some(s.clone()), spec.noise);
    Ok((bld.build(), Type2Layout { a, s, u }))
}

/// Optimal weights and worst-case error; dispatches on `κ`.
pub fn solve_type2(spec: &ProblemSpec, tol: f64) -> Result<RecoveryWeights> {
    if spec.kappa.is_infinite() {
        return solve_type2_kappa_inf(spec, tol);
    }
    let (p, layout) = assemble_type2(spec)?;
    let sol = conic::solve(&p, tol)?;
    require_optimal(&sol)?;
    Ok(RecoveryWeights {
        weights: sol.slice(layout.a),
        certified_value: sol.objective.max(0.0),
        model: ModelType::Type2,
        diagnostics: SolveDiagnostics::from(&sol),
        warnings: Vec::new(),
    })
}

/// Without the bound on `‖v‖`: minimize `ε(1 + Σ|aᵢ|) (+ η‖a‖_{p′})`
/// subject to `Ca = b`, i.e. exactness of the map on `P_n`.
pub fn assemble_type2_kappa_inf(spec: &ProblemSpec) -> Result<(ConicProblem, Range<usize>)> {
    spec.validate()?;
    let n = spec.n;
    let b = spec.quantity_moments(n)?.into_entries();
    let cols = spec.observation_moments(n)?;
    let mut bld = ConicBuilder::new();
    let a = bld.add_vars(spec.m());
    let s = add_abs_slacks(&mut bld, a.clone());
    for v in s.clone() {
        bld.add_cost(v, spec.epsilon);
    }
    bld.add_offset(spec.epsilon);
    for j in 0..n {
        let mut e = AffineExpr::constant(-b[j]);
        for (i, col) in cols.iter().enumerate() {
            e = e.term(a.start + i, col[j]);
        }
        bld.add_equality(e);
    }
    add_noise_term(&mut bld, a.clone(), Some(s), spec.noise);
    Ok((bld.build(), a))
}

pub fn solve_type2_kappa_inf(spec: &ProblemSpec, tol: f64) -> Result<RecoveryWeights> {
    let (p, a) = assemble_type2_kappa_inf(spec)?;
    let mut warnings = Vec::new();
    if spec.n > spec.m() {
        let msg = format!(
            "n = {} exceeds m = {}: exactness on P_n is generically unattainable without a bound on the model part",
            spec.n,
            spec.m()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let sol = if p.has_nonlinear_cones() {
        conic::solve(&p, tol)?
    } else {
        conic::lp_solve(&p, tol)?
    };
    require_optimal(&sol)?;
    Ok(RecoveryWeights {
        weights: sol.slice(a),
        certified_value: sol.objective.max(0.0),
        model: spec.model,
        diagnostics: SolveDiagnostics::from(&sol),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{SolveStatus, DEFAULT_TOL};
    use crate::problem::{NoiseModel, NoiseNorm, Quantity};

    fn micro(kappa: Kappa) -> ProblemSpec {
        ProblemSpec::new(ModelType::Type2, 1, 0.1, kappa, vec![0.0], Quantity::PointEvaluation(0.5)).unwrap()
    }

    /// `min_a ε(1 + |a|) + κ|1 − a|` by grid search on [−3, 3].
    fn scalar_oracle(eps: f64, kappa: f64) -> (f64, f64) {
        (0..=60_000)
            .map(|k| -3.0 + k as f64 * 1e-4)
            .map(|a| (eps * (1.0 + a.abs()) + kappa * (1.0 - a).abs(), a))
            .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }

    #[test]
    fn micro_instance_matches_scalar_oracle() {
        for (kappa, value, weight) in [(1.0, 0.2, 1.0), (0.05, 0.15, 0.0)] {
            let (ov, oa) = scalar_oracle(0.1, kappa);
            assert!((ov - value).abs() < 1e-12 && (oa - weight).abs() < 1e-9);
            let r = solve_type2(&micro(Kappa::Finite(kappa)), DEFAULT_TOL).unwrap();
            assert!((r.certified_value - value).abs() < 1e-6, "{}", r.certified_value);
            assert!((r.weights[0] - weight).abs() < 1e-6, "{:?}", r.weights);
        }
    }

    #[test]
    fn zero_noise_gives_identical_problem() {
        let s = micro(Kappa::Finite(1.0));
        for p in [NoiseNorm::One, NoiseNorm::Two, NoiseNorm::Infinity] {
            let noisy = s.clone().with_noise(NoiseModel { p, eta: 0.0 }).unwrap();
            assert_eq!(assemble_type2(&noisy).unwrap(), assemble_type2(&s).unwrap());
        }
    }

    #[test]
    fn kappa_inf_examples() {
        let r = solve_type2_kappa_inf(&micro(Kappa::Infinite), DEFAULT_TOL).unwrap();
        assert!((r.weights[0] - 1.0).abs() < 1e-7 && (r.certified_value - 0.2).abs() < 1e-7);

        let s = ProblemSpec::new(ModelType::Type2, 2, 0.1, Kappa::Infinite, vec![-1.0, 1.0], Quantity::PointEvaluation(0.0)).unwrap();
        let r = solve_type2(&s, DEFAULT_TOL).unwrap();
        assert!((r.weights[0] - 0.5).abs() < 1e-7 && (r.weights[1] - 0.5).abs() < 1e-7);
        assert!((r.certified_value - 0.2).abs() < 1e-7);

        let s = ProblemSpec::new(ModelType::Type2, 2, 0.1, Kappa::Infinite, vec![0.0], Quantity::PointEvaluation(0.5)).unwrap();
        assert_eq!(solve_type2(&s, DEFAULT_TOL).unwrap_err(), Error::Solver { status: SolveStatus::Infeasible });
    }

    #[test]
    fn large_kappa_approaches_constrained_value() {
        let r = solve_type2(&micro(Kappa::Finite(1e6)), DEFAULT_TOL).unwrap();
        assert!((r.certified_value - 0.2).abs() < 1e-4, "{}", r.certified_value);
    }

    #[test]
    fn rejects_wrong_model_and_infinite_kappa() {
        let mut s = micro(Kappa::Finite(1.0));
        s.model = ModelType::Type1;
        assert!(assemble_type2(&s).is_err());
        assert!(assemble_type2(&micro(Kappa::Infinite)).is_err());
    }
}
