#![allow(dead_code)]

use optrec::problem::{Kappa, ModelType, ProblemSpec, Quantity};
use proptest::prelude::*;

/// Sorted points in [-1, 1] at least `sep` apart.
pub fn separated_points(max: usize, sep: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..=max).prop_map(move |mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < sep);
        v
    })
}

pub fn quantity(points: Vec<f64>) -> impl Strategy<Value = (Vec<f64>, Quantity)> {
    prop_oneof![
        3 => (-1.0f64..=1.0).prop_map(Quantity::PointEvaluation),
        1 => Just(Quantity::NormalizedIntegral),
    ]
    .prop_map(move |q| (points.clone(), q))
    .prop_filter("x0 must stay away from the data sites", |(pts, q)| {
        q.point().is_none_or(|x0| pts.iter().all(|p| (p - x0).abs() > 0.02))
    })
}

pub fn spec(model: ModelType, max_n: usize, max_m: usize) -> impl Strategy<Value = ProblemSpec> {
    (1..=max_n, separated_points(max_m, 0.05).prop_flat_map(quantity), 0.01f64..1.0, 0.01f64..10.0).prop_map(
        move |(n, (points, q), eps, kappa)| ProblemSpec::new(model, n, eps, Kappa::Finite(kappa), points, q).unwrap(),
    )
}
