use nalgebra::DMatrix;
use optrec::conic::{self, AffineExpr, ConicBuilder, ConicProblem, DEFAULT_TOL};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_TOL;

/// `min cᵀx` s.t. `Ax = Ax₀`, `x ≥ 0`, with `c = Aᵀy₀ + s₀` and `s₀ > 0`,
/// so both the primal and the dual are strictly feasible. Returns the
/// problem and the feasible point `x₀`.
fn random_lp(n: usize, p: usize, entries: &[f64], x0: &[f64], y0: &[f64], s0: &[f64]) -> (ConicProblem, Vec<f64>) {
    let a = DMatrix::from_fn(p, n, |i, j| entries[i * n + j]);
    let mut b = ConicBuilder::new();
    let x = b.add_vars(n);
    for j in 0..n {
        let c: f64 = (0..p).map(|i| a[(i, j)] * y0[i]).sum::<f64>() + s0[j];
        b.add_cost(x.start + j, c);
    }
    for i in 0..p {
        let rhs: f64 = (0..n).map(|j| a[(i, j)] * x0[j]).sum();
        let mut e = AffineExpr::constant(-rhs);
        for j in 0..n {
            e = e.term(x.start + j, a[(i, j)]);
        }
        b.add_equality(e);
    }
    b.add_nonneg(x.map(AffineExpr::var).collect());
    (b.build(), x0.to_vec())
}

fn lp_case() -> impl Strategy<Value = (ConicProblem, Vec<f64>)> {
    (2usize..8)
        .prop_flat_map(|n| (Just(n), 1usize..n))
        .prop_flat_map(|(n, p)| {
            (
                Just(n),
                Just(p),
                prop::collection::vec(-2.0f64..2.0, n * p),
                prop::collection::vec(0.1f64..2.0, n),
                prop::collection::vec(-1.0f64..1.0, p),
                prop::collection::vec(0.1f64..2.0, n),
            )
        })
        .prop_map(|(n, p, e, x0, y0, s0)| random_lp(n, p, &e, &x0, &y0, &s0))
}

/// `min ⟨C, X⟩` s.t. `tr X = 1`, `X ⪰ 0`; the value is `λ_min(C)`.
fn eigen_sdp(c: &DMatrix<f64>) -> ConicProblem {
    let d = c.nrows();
    let mut b = ConicBuilder::new();
    let mut idx = vec![vec![0; d]; d];
    for j in 0..d {
        for i in j..d {
            let v = b.add_vars(1).start;
            idx[i][j] = v;
            b.add_cost(v, if i == j { c[(i, i)] } else { 2.0 * c[(i, j)] });
        }
    }
    let trace = (0..d).fold(AffineExpr::constant(-1.0), |e, i| e.term(idx[i][i], 1.0));
    b.add_equality(trace);
    b.add_psd(d, |i, j| AffineExpr::var(idx[i][j]));
    b.build()
}

fn symmetric(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=max).prop_flat_map(|d| prop::collection::vec(-1.0f64..1.0, d * d).prop_map(move |v| {
        let m = DMatrix::from_vec(d, d, v);
        (&m + m.transpose()) * 0.5
    }))
}

fn slack(value: f64) -> f64 {
    10.0 * TOL * (1.0 + value.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weak_duality_on_random_lps((p, _) in lp_case()) {
        let sol = conic::solve(&p, TOL).unwrap();
        prop_assert!(sol.is_optimal(), "{:?}", sol.status);
        prop_assert!(sol.objective >= sol.dual_objective - slack(sol.objective));
    }

    #[test]
    fn hand_feasible_point_dominates((p, x0) in lp_case()) {
        let sol = conic::solve(&p, TOL).unwrap();
        let hand: f64 = p.objective().iter().zip(&x0).map(|(c, x)| c * x).sum::<f64>() + p.objective_offset();
        prop_assert!(sol.objective <= hand + slack(hand));
    }

    #[test]
    fn permuting_variables_keeps_the_value((p, perm) in lp_case().prop_flat_map(|(p, _)| {
        let n = p.num_vars();
        (Just(p), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    })) {
        let a = conic::solve(&p, TOL).unwrap();
        let b = conic::solve(&p.permute_vars(&perm).unwrap(), TOL).unwrap();
        prop_assert!((a.objective - b.objective).abs() < slack(a.objective), "{} vs {}", a.objective, b.objective);
    }

    #[test]
    fn sdp_recovers_smallest_eigenvalue(c in symmetric(5)) {
        let sol = conic::solve(&eigen_sdp(&c), TOL).unwrap();
        let lmin = c.clone().symmetric_eigenvalues().min();
        prop_assert!(sol.is_optimal());
        prop_assert!((sol.objective - lmin).abs() < 1e-6, "{} vs {lmin}", sol.objective);
        prop_assert!(sol.objective >= sol.dual_objective - slack(sol.objective));
    }
}
