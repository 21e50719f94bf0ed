//! Independent brute-force checks for the recovery solvers.
//!
//! Everything here works directly with Chebyshev coefficient vectors and
//! dense grids. Only the linear-programming solver is shared with the
//! optimization models.
//!
//! Sup-norms are certified on grids. A polynomial of degree `d` sampled at
//! `K > d` Chebyshev points (first kind, or `K + 1` extrema) satisfies
//! `‖p‖∞ ≤ max_grid |p| / cos(dπ/(2K))`, since `θ ↦ p(cos θ)` is a
//! trigonometric polynomial sampled at `2K` equispaced angles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chebyshev::{self, chebyshev_nodes, check_distinct, clenshaw, FunctionalSpec};
use crate::conic::{self, AffineExpr, ConicBuilder, SolveStatus};
use crate::error::{Error, Result};
use crate::problem::{Kappa, ModelType, ProblemSpec};

/// Points of the LP grid in [`max_over_ball`] (Chebyshev extrema).
pub const DEFAULT_BALL_GRID: usize = 4096;
/// Random directions tried for the lower bound in [`max_over_ball`].
pub const DEFAULT_BALL_SAMPLES: usize = 256;
/// Solver tolerance of the ball LP.
const BALL_LP_TOL: f64 = 1e-10;
/// Below this the functional is treated as vanishing on `P_n`.
pub const EXACTNESS_TOL: f64 = 1e-7;
const BISECTION_STEPS: usize = 80;

/// A closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `‖ρ − Σ aᵢ δ_{xᵢ}‖` in the dual of `C[-1, 1]`, i.e. the total variation
/// of the signed measure.
pub fn dual_norm(a: &[f64], quantity: &FunctionalSpec, points: &[f64]) -> Result<f64> {
    if a.len() != points.len() {
        return Err(Error::invalid("weights", format!("{} weights for {} points", a.len(), points.len())));
    }
    check_distinct(points, "points")?;
    quantity.validate()?;
    let observed: f64 = a.iter().map(|v| v.abs()).sum();
    match quantity {
        FunctionalSpec::PointEvaluation(x0) => {
            if points.contains(x0) {
                return Err(Error::invalid("x0", format!("{x0} coincides with an observation point")));
            }
            Ok(1.0 + observed)
        }
        // Absolutely continuous, so singular to every atom.
        FunctionalSpec::NormalizedIntegral => Ok(1.0 + observed),
        FunctionalSpec::AtomicMeasure(atoms) => {
            let mut merged: Vec<(f64, f64)> = atoms.clone();
            for (&x, &ai) in points.iter().zip(a) {
                match merged.iter_mut().find(|(loc, _)| *loc == x) {
                    Some(atom) => atom.1 -= ai,
                    None => merged.push((x, -ai)),
                }
            }
            Ok(merged.iter().map(|(_, w)| w.abs()).sum())
        }
    }
}

/// Coefficients `g` with `Q(v) − Σ aᵢ v(xᵢ) = Σ_j g_j c_j` for
/// `v = Σ_j c_j T_j`, `j < n`.
fn residual_functional(a: &[f64], spec: &ProblemSpec) -> Result<Vec<f64>> {
    if a.len() != spec.m() {
        return Err(Error::invalid("weights", format!("{} weights for {} points", a.len(), spec.m())));
    }
    let n = spec.n;
    let mut g: Vec<f64> = match spec.quantity.functional() {
        FunctionalSpec::PointEvaluation(x0) => chebyshev::cheb_values(x0, n)?,
        FunctionalSpec::NormalizedIntegral => (0..n).map(|j| if j % 2 == 1 { 0.0 } else { 1.0 / (1.0 - (j * j) as f64) }).collect(),
        other => chebyshev::moments(&other, n)?.into_entries(),
    };
    for (&x, &ai) in spec.points.iter().zip(a) {
        for (gj, t) in g.iter_mut().zip(chebyshev::cheb_values(x, n)?) {
            *gj -= ai * t;
        }
    }
    Ok(g)
}

/// `K + 1` Chebyshev extrema `cos(jπ/K)`, including `±1`.
fn chebyshev_extrema(k: usize) -> Vec<f64> {
    (0..=k).map(|j| (PI * j as f64 / k as f64).cos()).collect()
}

/// `cos(dπ/(2K))`, the certification factor for degree `d` on `K` nodes.
fn grid_factor(degree: usize, k: usize) -> f64 {
    if degree == 0 {
        1.0
    } else {
        (degree as f64 * PI / (2 * k) as f64).cos()
    }
}

/// Sup-norm of a Chebyshev series, located on a grid of `10·deg + 64`
/// Chebyshev extrema and polished by golden-section search around every
/// local maximum of `|p|` on the grid.
pub fn sup_norm(coeffs: &[f64]) -> f64 {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return coeffs.first().map_or(0.0, |c| c.abs());
    }
    let pts = chebyshev_extrema(10 * deg + 64);
    let vals: Vec<f64> = pts.iter().map(|&x| clenshaw(coeffs, x).abs()).collect();
    let mut best = vals.iter().fold(0.0f64, |m, v| m.max(*v));
    let f = |x: f64| clenshaw(coeffs, x).abs();
    for i in 1..pts.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            best = best.max(golden_max(&f, pts[i + 1], pts[i - 1]));
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Bounds on `max_{v ∈ P_n, ‖v‖∞ ≤ 1} |Q(v) − Σ aᵢ v(xᵢ)|` with default
/// resolution and seed 0.
pub fn max_over_ball(a: &[f64], spec: &ProblemSpec) -> Result<Bounds> {
    max_over_ball_with(a, spec, DEFAULT_BALL_GRID, DEFAULT_BALL_SAMPLES, 0)
}

/// The upper bound comes from an LP over coefficient vectors bounded by one
/// on `grid + 1` Chebyshev extrema plus the atoms of the functional, a
/// relaxation of the unit ball, certified through its multipliers. The
/// lower bound evaluates feasible directions, the LP optimizer and
/// `samples` random vectors, each normalized by its sup-norm.
pub fn max_over_ball_with(a: &[f64], spec: &ProblemSpec, grid: usize, samples: usize, seed: u64) -> Result<Bounds> {
    spec.validate()?;
    if grid < spec.n {
        return Err(Error::invalid("grid", format!("{grid} grid intervals cannot resolve degree {}", spec.n - 1)));
    }
    let g = residual_functional(a, spec)?;
    let n = g.len();
    // The atoms of the functional itself keep the grid program exact when
    // the best representing measure is the functional.
    let mut pts = chebyshev_extrema(grid);
    pts.extend(spec.points.iter().copied());
    pts.extend(spec.quantity.point());
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut bld = ConicBuilder::new();
    let c = bld.add_vars(n);
    for (j, &gj) in g.iter().enumerate() {
        bld.add_cost(c.start + j, -gj);
    }
    let tvs = pts.iter().map(|&t| chebyshev::cheb_values(t, n)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(2 * pts.len());
    for tv in &tvs {
        let mut plus = AffineExpr::constant(1.0);
        let mut minus = AffineExpr::constant(1.0);
        for (j, &v) in tv.iter().enumerate() {
            plus = plus.term(c.start + j, -v);
            minus = minus.term(c.start + j, v);
        }
        rows.push(plus);
        rows.push(minus);
    }
    bld.add_nonneg(rows);
    // Both bounds below hold for any iterate, so a solve that stalls short
    // of the tolerance still yields valid (if looser) bounds.
    let sol = conic::lp_solve(&bld.build(), BALL_LP_TOL)?;
    if matches!(sol.status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
        return Err(Error::Solver { status: sol.status });
    }
    if !sol.is_optimal() {
        log::debug!("ball LP stopped with status {}; bounds use the best iterate", sol.status);
    }
    let upper = dual_certificate(&g, &tvs, &sol.z);

    let ratio = |coeffs: &[f64]| {
        let s = sup_norm(coeffs);
        if s > 0.0 {
            coeffs.iter().zip(&g).map(|(c, g)| c * g).sum::<f64>().abs() / s
        } else {
            0.0
        }
    };
    // Each T_j lies in the unit ball, so |g_j| is a lower bound as well.
    let mut lower = g.iter().fold(ratio(&sol.x[c.clone()]), |m, gj| m.max(gj.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        lower = lower.max(ratio(&coeffs));
    }
    Ok(Bounds {
        lower: lower.min(upper),
        upper,
    })
}

/// Weak-duality bound from the multipliers `z` of the rows `1 ∓ p(t_k) ≥ 0`.
/// The atoms `w_k = z⁺_k − z⁻_k` represent `g` up to a residual `r`, and
/// Chebyshev coefficients of a unit-norm polynomial are at most 2 in
/// magnitude, so `max_{B_{P_n}} |g(v)| ≤ Σ|w_k| + |r₀| + 2Σ_{j≥1}|r_j|`.
fn dual_certificate(g: &[f64], tvs: &[Vec<f64>], z: &[f64]) -> f64 {
    let mut r = g.to_vec();
    let mut mass = 0.0;
    for (k, tv) in tvs.iter().enumerate() {
        let w = z[2 * k] - z[2 * k + 1];
        mass += w.abs();
        for (rj, t) in r.iter_mut().zip(tv) {
            *rj -= w * t;
        }
    }
    let tail: f64 = r.iter().enumerate().map(|(j, v)| if j == 0 { v.abs() } else { 2.0 * v.abs() }).sum();
    (mass + tail) * (1.0 + 4.0 * tvs.len() as f64 * f64::EPSILON)
}

/// Bounds on the worst-case error of the weights `a` over the type-II set:
/// `ε‖Q − Σaᵢδ_{xᵢ}‖ + κ·max_{B_{P_n}}|Q(v) − Σaᵢv(xᵢ)| (+ η‖a‖_{p′})`.
///
/// With `κ = ∞` the second term is zero when the functional vanishes on
/// `P_n` up to [`EXACTNESS_TOL`] and infinite otherwise.
pub fn worst_case_type2(a: &[f64], spec: &ProblemSpec) -> Result<Bounds> {
    worst_case_type2_with(a, spec, DEFAULT_BALL_GRID, DEFAULT_BALL_SAMPLES, 0)
}

/// [`worst_case_type2`] with the resolution of [`max_over_ball_with`].
pub fn worst_case_type2_with(a: &[f64], spec: &ProblemSpec, grid: usize, samples: usize, seed: u64) -> Result<Bounds> {
    if spec.model != ModelType::Type2 {
        return Err(Error::invalid("model", "the decomposition holds for type2 specs"));
    }
    let ball = max_over_ball_with(a, spec, grid, samples, seed)?;
    let base = spec.epsilon * dual_norm(a, &spec.quantity.functional(), &spec.points)? + spec.noise.map_or(0.0, |nm| nm.eta * nm.p.conjugate_norm(a));
    let (lo, hi) = match spec.kappa {
        Kappa::Finite(k) => (k * ball.lower, k * ball.upper),
        Kappa::Infinite if ball.upper <= EXACTNESS_TOL => (0.0, 0.0),
        Kappa::Infinite if ball.lower > EXACTNESS_TOL => (f64::INFINITY, f64::INFINITY),
        Kappa::Infinite => (0.0, f64::INFINITY),
    };
    Ok(Bounds {
        lower: base + lo,
        upper: base + hi,
    })
}

/// A function `f = v + h` given by Chebyshev coefficients, with sup-norms
/// certified on an audit grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    /// Polynomial part, degree `< n`.
    pub v: Vec<f64>,
    /// Perturbation.
    pub h: Vec<f64>,
    /// Number of Chebyshev nodes of the audit grid.
    pub audit_size: usize,
    /// Certified upper bounds on `‖v‖∞`, `‖h‖∞`, `‖v + h‖∞`.
    pub v_sup: f64,
    pub h_sup: f64,
    pub f_sup: f64,
    /// Largest values of `|v|`, `|h|`, `|v + h|` on the audit grid.
    pub v_grid_sup: f64,
    pub h_grid_sup: f64,
    pub f_grid_sup: f64,
}

/// Audit grid size for a given degree.
pub fn audit_size(degree: usize) -> usize {
    10 * degree + 64
}

/// Degree ignoring trailing zero coefficients.
fn effective_degree(c: &[f64]) -> usize {
    c.iter().rposition(|v| *v != 0.0).unwrap_or(0)
}

/// Number of audit nodes for series of `len` coefficients.
fn audit_nodes(len: usize) -> usize {
    audit_size(len.saturating_sub(1))
}

/// Certified bounds and grid maxima of `|v|`, `|h|`, `|v + h|` on `k`
/// first-kind nodes; each bound uses the degree of its own series.
fn audit(v: &[f64], h: &[f64], k: usize) -> ([f64; 3], [f64; 3]) {
    let mut sup = [0.0f64; 3];
    for x in chebyshev_nodes(k) {
        let (a, b) = (clenshaw(v, x), clenshaw(h, x));
        sup[0] = sup[0].max(a.abs());
        sup[1] = sup[1].max(b.abs());
        sup[2] = sup[2].max((a + b).abs());
    }
    let (dv, dh) = (effective_degree(v), effective_degree(h));
    let degrees = [dv, dh, dv.max(dh)];
    let cert = std::array::from_fn(|i| sup[i] / grid_factor(degrees[i], k));
    (cert, sup)
}

/// Certified sup-norm of a single series on `k` nodes.
fn certified_sup(coeffs: &[f64], k: usize) -> f64 {
    audit(coeffs, &[], k).0[0]
}

impl SampledFunction {
    pub fn from_coefficients(v: Vec<f64>, h: Vec<f64>) -> Self {
        let audit_size = audit_nodes(v.len().max(h.len()));
        let (cert, sup) = audit(&v, &h, audit_size);
        SampledFunction {
            audit_size,
            v_sup: cert[0],
            h_sup: cert[1],
            f_sup: cert[2],
            v_grid_sup: sup[0],
            h_grid_sup: sup[1],
            f_grid_sup: sup[2],
            v,
            h,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.v, x) + clenshaw(&self.h, x)
    }

    /// `|Q(f) − Σ aᵢ f(xᵢ)|`. The integral is evaluated by adaptive
    /// quadrature.
    pub fn error(&self, a: &[f64], spec: &ProblemSpec) -> f64 {
        let q = spec.quantity.functional().apply(|x| self.eval(x));
        let r: f64 = spec.points.iter().zip(a).map(|(&x, ai)| ai * self.eval(x)).sum();
        (q - r).abs()
    }
}

/// Sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub struct SamplerConfig {
    /// Number of Chebyshev coefficients of `h`; `None` means `4n`.
    pub h_len: Option<usize>,
}


fn random_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let c: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if c.iter().any(|v| *v != 0.0) {
            return c;
        }
    }
}

fn scale_to(c: &mut [f64], target: f64, k: usize) {
    let s = certified_sup(c, k);
    c.iter_mut().for_each(|v| *v *= target / s);
}

fn generator(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws from the type-II set: `‖v‖∞ = κ` and `‖h‖∞ = ε` (certified).
/// With `κ = ∞` the polynomial part is scaled to one.
pub fn sample_type2_with(spec: &ProblemSpec, seed: u64, stream: u64, cfg: SamplerConfig) -> SampledFunction {
    let mut rng = generator(seed, stream);
    let mut v = random_series(&mut rng, spec.n);
    let mut h = random_series(&mut rng, cfg.h_len.unwrap_or(4 * spec.n).max(1));
    let k = audit_nodes(v.len().max(h.len()));
    scale_to(&mut v, spec.kappa.finite().unwrap_or(1.0), k);
    scale_to(&mut h, spec.epsilon, k);
    SampledFunction::from_coefficients(v, h)
}

/// Draws from the type-I set: `‖h‖∞ = min(ε, κ)` and `v` scaled by
/// bisection so that `‖v + h‖∞ = κ` (certified). With `κ = ∞` the
/// polynomial part is scaled to one.
pub fn sample_type1_with(spec: &ProblemSpec, seed: u64, stream: u64, cfg: SamplerConfig) -> SampledFunction {
    let mut rng = generator(seed, stream);
    let mut v = random_series(&mut rng, spec.n);
    let mut h = random_series(&mut rng, cfg.h_len.unwrap_or(4 * spec.n).max(1));
    let k = audit_nodes(v.len().max(h.len()));
    let Kappa::Finite(kappa) = spec.kappa else {
        scale_to(&mut v, 1.0, k);
        scale_to(&mut h, spec.epsilon, k);
        return SampledFunction::from_coefficients(v, h);
    };
    scale_to(&mut h, spec.epsilon.min(kappa), k);
    let combined = |lam: f64| -> Vec<f64> {
        let len = v.len().max(h.len());
        (0..len).map(|j| lam * v.get(j).copied().unwrap_or(0.0) + h.get(j).copied().unwrap_or(0.0)).collect()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while certified_sup(&combined(hi), k) < kappa {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if certified_sup(&combined(mid), k) <= kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v.iter_mut().for_each(|c| *c *= lo);
    SampledFunction::from_coefficients(v, h)
}

pub fn sample_type1(spec: &ProblemSpec, seed: u64) -> SampledFunction {
    sample_type1_with(spec, seed, 0, SamplerConfig::default())
}

pub fn sample_type2(spec: &ProblemSpec, seed: u64) -> SampledFunction {
    sample_type2_with(spec, seed, 0, SamplerConfig::default())
}

/// `count` samples for the spec's model, sample `i` drawn from stream `i`.
pub fn sample_many(spec: &ProblemSpec, seed: u64, count: usize, cfg: SamplerConfig) -> Vec<SampledFunction> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| match spec.model {
            ModelType::Type1 => sample_type1_with(spec, seed, i, cfg),
            ModelType::Type2 => sample_type2_with(spec, seed, i, cfg),
        })
        .collect()
}

/// `max |Q(f) − Σ aᵢ f(xᵢ)|` over the samples, a lower bound on the
/// worst-case error; zero for no samples.
pub fn empirical_error(a: &[f64], samples: &[SampledFunction], spec: &ProblemSpec) -> f64 {
    samples.par_iter().map(|s| s.error(a, spec)).reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Quantity;

    fn micro(model: ModelType, n: usize) -> ProblemSpec {
        ProblemSpec::new(model, n, 0.1, Kappa::Finite(1.0), vec![0.0], Quantity::PointEvaluation(0.5)).unwrap()
    }

    #[test]
    fn dual_norm_examples() {
        let q = FunctionalSpec::PointEvaluation(0.5);
        assert_eq!(dual_norm(&[0.0], &q, &[0.0]).unwrap(), 1.0);
        assert_eq!(dual_norm(&[1.0], &q, &[0.0]).unwrap(), 2.0);
        assert_eq!(dual_norm(&[0.5, -0.5], &q, &[0.0, 0.2]).unwrap(), 2.0);
        assert!(dual_norm(&[1.0], &q, &[0.5]).is_err());
        assert!(dual_norm(&[1.0, 2.0], &q, &[0.0]).is_err());
    }

    #[test]
    fn dual_norm_merges_coinciding_atoms() {
        let q = FunctionalSpec::AtomicMeasure(vec![(0.0, 1.0), (0.3, 2.0)]);
        assert_eq!(dual_norm(&[1.0], &q, &[0.0]).unwrap(), 2.0);
        assert_eq!(dual_norm(&[-1.0], &q, &[0.9]).unwrap(), 4.0);
    }

    #[test]
    fn ball_scalar_case() {
        for t in [0.0, 0.3, 1.0, 2.5, -1.0] {
            let b = max_over_ball(&[t], &micro(ModelType::Type2, 1)).unwrap();
            assert!((b.lower - (1.0 - t).abs()).abs() < 1e-9, "{t}: {b:?}");
            assert!((b.upper - (1.0 - t).abs()).abs() < 1e-9, "{t}: {b:?}");
        }
    }

    #[test]
    fn ball_linear_case() {
        let b = max_over_ball(&[1.0], &micro(ModelType::Type2, 2)).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-9 && (b.upper - 0.5).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn ball_bounds_for_point_evaluation() {
        // a = 0: max |v(x₀)| over the ball is one.
        for n in [1, 3, 6] {
            let b = max_over_ball(&[0.0], &micro(ModelType::Type2, n)).unwrap();
            assert!(b.lower <= 1.0 + 1e-12 && (b.upper - 1.0).abs() < 1e-7, "{n}: {b:?}");
            assert!(b.lower > 1.0 - 1e-9, "{n}: {b:?}");
        }
    }

    #[test]
    fn sup_norm_of_chebyshev_polynomials() {
        assert!((sup_norm(&[0.0, 0.0, 0.0, 1.0]) - 1.0).abs() < 1e-14);
        assert!((sup_norm(&[0.5, 0.5]) - 1.0).abs() < 1e-14);
        // 1 - x² peaks at zero with value one.
        assert!((sup_norm(&[0.5, 0.0, -0.5]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn samples_satisfy_model_invariants() {
        for model in [ModelType::Type1, ModelType::Type2] {
            for n in [1, 3] {
                let spec = micro(model, n);
                for s in sample_many(&spec, 11, 50, SamplerConfig::default()) {
                    assert!(s.h_sup <= spec.epsilon * (1.0 + 1e-12), "{s:?}");
                    assert!(s.h_grid_sup >= spec.epsilon * 0.99, "{s:?}");
                    match model {
                        ModelType::Type2 => assert!(s.v_sup <= 1.0 + 1e-12 && s.v_grid_sup >= 0.99),
                        ModelType::Type1 => assert!(s.f_sup <= 1.0 + 1e-12 && s.f_grid_sup >= 0.99, "{s:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = micro(ModelType::Type1, 3);
        assert_eq!(sample_type1(&spec, 5), sample_type1(&spec, 5));
        assert_eq!(sample_type2(&spec, 5), sample_type2(&spec, 5));
        assert_ne!(sample_type2(&spec, 5), sample_type2(&spec, 6));
        assert_eq!(sample_many(&spec, 9, 20, SamplerConfig::default()), sample_many(&spec, 9, 20, SamplerConfig::default()));
    }

    #[test]
    fn adversarial_witness() {
        // v ≡ κ and h = εT₆, so h(0) = −ε and h(0.5) = ε.
        let spec = micro(ModelType::Type2, 1);
        let mut h = vec![0.0; 7];
        h[6] = 0.1;
        let w = SampledFunction::from_coefficients(vec![1.0], h.clone());
        assert!(sup_norm(&h) <= 0.1 + 1e-12 && w.v_sup <= 1.0 + 1e-12);
        assert!(empirical_error(&[1.0], &[w], &spec) >= 0.2 - 1e-9);
        assert_eq!(empirical_error(&[1.0], &[], &spec), 0.0);
    }

    #[test]
    fn worst_case_for_zero_weights() {
        let spec = micro(ModelType::Type2, 3);
        let b = worst_case_type2(&[0.0], &spec).unwrap();
        assert!(b.contains(1.1, 1e-7) && b.width() < 1e-6, "{b:?}");
    }
}
