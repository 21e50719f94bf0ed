mod common;

use optrec::chebyshev::moment_matrix;
use optrec::conic::DEFAULT_TOL;
use optrec::model_type1::{convergence_study, sandwich, solve_type1_lower};
use optrec::oracle::{empirical_error, sample_many, SamplerConfig};
use optrec::problem::{Kappa, ModelType, ProblemSpec, Quantity};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_TOL;

fn point_spec() -> impl Strategy<Value = ProblemSpec> {
    common::spec(ModelType::Type1, 3, 4).prop_filter("grid bound needs point evaluation", |s| s.quantity.point().is_some())
}

fn truncation(spec: &ProblemSpec) -> usize {
    (4 * spec.n).max(spec.m())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lower_bound_stays_below_upper(spec in point_spec(), k in prop::sample::select(vec![32usize, 64, 128])) {
        let r = sandwich(&spec, truncation(&spec), k, TOL).unwrap();
        let beta = r.beta_t.unwrap();
        prop_assert!(r.alpha_n <= beta + 2.0 * TOL, "{} > {beta}", r.alpha_n);
        prop_assert!(r.ordered);
    }

    #[test]
    fn bounds_tighten_monotonically(spec in point_spec()) {
        let base = spec.n.max(spec.m());
        let t = convergence_study(&spec, &[base, 2 * base, 4 * base], &[32, 64, 128], TOL).unwrap();
        for w in t.rows.windows(2) {
            prop_assert!(w[1].alpha >= w[0].alpha - 1e-8, "{:?}", t.rows);
            prop_assert!(w[1].beta.unwrap() <= w[0].beta.unwrap() + 1e-8, "{:?}", t.rows);
        }
    }

    #[test]
    fn samples_never_beat_the_upper_bound(spec in point_spec(), seed in any::<u64>()) {
        let r = sandwich(&spec, truncation(&spec), 64, TOL).unwrap();
        let samples = sample_many(&spec, seed, 1000, SamplerConfig::default());
        let e = empirical_error(r.a_t.as_ref().unwrap(), &samples, &spec);
        prop_assert!(e <= r.beta_t.unwrap() + 1e-6, "{e} > {:?}", r.beta_t);
    }

    /// `μ = 0, ν = ρ − Σaᵢδ_{xᵢ}` is feasible for every `a`.
    #[test]
    fn pure_model_part_dominates(spec in common::spec(ModelType::Type1, 3, 4), a in prop::collection::vec(-2.0f64..2.0, 4)) {
        let alpha = solve_type1_lower(&spec, truncation(&spec), TOL).unwrap().value;
        let a = &a[..spec.m()];
        let hand = spec.kappa.value() * (1.0 + a.iter().map(|v| v.abs()).sum::<f64>());
        prop_assert!(hand >= alpha - 2.0 * TOL, "{hand} < {alpha}");
    }

    /// With `m = n` the interpolation weights make `ν = 0, μ = ρ − Σaᵢδ_{xᵢ}`
    /// feasible, since `μ` then annihilates `P_n`.
    #[test]
    fn interpolation_measure_dominates(spec in common::spec(ModelType::Type1, 4, 4)) {
        let spec = ProblemSpec { n: spec.m(), ..spec };
        let b = spec.quantity_moments(spec.m()).unwrap().into_entries();
        let mm = moment_matrix(&spec.points).unwrap().matrix;
        let a = mm.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        let hand = spec.epsilon * (1.0 + a.iter().map(|v| v.abs()).sum::<f64>());
        let alpha = solve_type1_lower(&spec, truncation(&spec), TOL).unwrap().value;
        prop_assert!(hand >= alpha - 2.0 * TOL, "{hand} < {alpha}");
    }

    #[test]
    fn bounds_scale_with_the_model(spec in point_spec(), t in 0.1f64..10.0) {
        let base = sandwich(&spec, truncation(&spec), 64, TOL).unwrap();
        let scaled = sandwich(&spec.scaled(t), truncation(&spec), 64, TOL).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 10.0 * TOL * (1.0 + x.abs().max(y.abs()));
        prop_assert!(close(scaled.alpha_n, t * base.alpha_n), "{} vs {}", scaled.alpha_n, t * base.alpha_n);
        prop_assert!(close(scaled.beta_t.unwrap(), t * base.beta_t.unwrap()));
    }
}

#[test]
fn infinite_kappa_bounds_coincide() {
    let spec = ProblemSpec::new(ModelType::Type1, 2, 0.1, Kappa::Infinite, vec![-1.0, 1.0], Quantity::PointEvaluation(0.0)).unwrap();
    let r = sandwich(&spec, 8, 64, TOL).unwrap();
    assert!((r.alpha_n - 0.2).abs() < 1e-7 && (r.beta_t.unwrap() - 0.2).abs() < 1e-7, "{r:?}");
}
