use optrec::chebyshev::{cheb_values, moment_matrix, moments, toeplitz, FunctionalSpec};
use proptest::prelude::*;

fn atoms(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..=1.0, 0.0f64..5.0), 1..max)
}

fn distinct_points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..max).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 2e-2);
        v
    })
}

proptest! {
    #[test]
    fn chebyshev_values_are_bounded(x in -1.0f64..=1.0, n in 1usize..=64) {
        for t in cheb_values(x, n).unwrap() {
            prop_assert!(t.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn toeplitz_of_positive_measure_is_psd(mu in atoms(12), n in 1usize..=32) {
        let u = moments(&FunctionalSpec::AtomicMeasure(mu), n).unwrap();
        let t = toeplitz(u.entries()).unwrap();
        let min = t.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-9, "min eigenvalue {min}");
    }

    #[test]
    fn moments_are_linear(mu in atoms(8), nu in atoms(8), s in -3.0f64..3.0, t in -3.0f64..3.0, n in 1usize..=24) {
        let combined: Vec<(f64, f64)> = mu.iter().map(|&(x, w)| (x, s * w)).chain(nu.iter().map(|&(x, w)| (x, t * w))).collect();
        let lhs = moments(&FunctionalSpec::AtomicMeasure(combined), n).unwrap();
        let a = moments(&FunctionalSpec::AtomicMeasure(mu), n).unwrap();
        let b = moments(&FunctionalSpec::AtomicMeasure(nu), n).unwrap();
        for j in 0..n {
            let rhs = s * a.entries()[j] + t * b.entries()[j];
            prop_assert!((lhs.entries()[j] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn moment_matrix_is_invertible(points in distinct_points(10)) {
        let m = moment_matrix(&points).unwrap().matrix;
        let mut e1 = nalgebra::DVector::zeros(points.len());
        e1[0] = 1.0;
        let a = m.clone().lu().solve(&e1).expect("invertible");
        let res = (&m * &a - &e1).amax();
        prop_assert!(res < 1e-8, "residual {res}");
    }
}
