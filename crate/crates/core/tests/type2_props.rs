mod common;

use optrec::conic::DEFAULT_TOL;
use optrec::model_type2::solve_type2;
use optrec::oracle::{empirical_error, sample_many, worst_case_type2, worst_case_type2_with, SamplerConfig};
use optrec::problem::{Kappa, ModelType, NoiseModel, NoiseNorm};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certified_value_matches_decomposition(spec in common::spec(ModelType::Type2, 4, 5)) {
        let r = solve_type2(&spec, DEFAULT_TOL).unwrap();
        let b = worst_case_type2(&r.weights, &spec).unwrap();
        prop_assert!(b.contains(r.certified_value, 1e-6), "{} not in {b:?}", r.certified_value);
    }

    #[test]
    fn perturbed_weights_do_no_better(
        spec in common::spec(ModelType::Type2, 3, 4),
        shifts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 100),
    ) {
        let r = solve_type2(&spec, DEFAULT_TOL).unwrap();
        for shift in &shifts {
            let a: Vec<f64> = r.weights.iter().zip(shift).map(|(w, d)| w + d).collect();
            let b = worst_case_type2_with(&a, &spec, 256, 0, 0).unwrap();
            prop_assert!(b.upper >= r.certified_value - 1e-6, "{a:?}: {b:?} < {}", r.certified_value);
        }
    }

    #[test]
    fn value_grows_with_kappa(spec in common::spec(ModelType::Type2, 4, 5)) {
        let mut prev = 0.0;
        for kappa in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let s = optrec::problem::ProblemSpec { kappa: Kappa::Finite(kappa), ..spec.clone() };
            let v = solve_type2(&s, DEFAULT_TOL).unwrap().certified_value;
            prop_assert!(v >= prev - 1e-6, "kappa {kappa}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn samples_never_beat_the_certificate(spec in common::spec(ModelType::Type2, 4, 5), seed in any::<u64>()) {
        let r = solve_type2(&spec, DEFAULT_TOL).unwrap();
        let samples = sample_many(&spec, seed, 1000, SamplerConfig::default());
        let e = empirical_error(&r.weights, &samples, &spec);
        prop_assert!(e <= r.certified_value + 1e-6, "{e} > {}", r.certified_value);
    }

    #[test]
    fn zero_noise_keeps_the_weights(spec in common::spec(ModelType::Type2, 4, 5)) {
        let base = solve_type2(&spec, DEFAULT_TOL).unwrap();
        for p in [NoiseNorm::One, NoiseNorm::Two, NoiseNorm::Infinity] {
            let noisy = spec.clone().with_noise(NoiseModel { p, eta: 0.0 }).unwrap();
            let r = solve_type2(&noisy, DEFAULT_TOL).unwrap();
            for (a, b) in r.weights.iter().zip(&base.weights) {
                prop_assert!((a - b).abs() <= 1e-8, "{p:?}: {:?} vs {:?}", r.weights, base.weights);
            }
        }
    }
}
