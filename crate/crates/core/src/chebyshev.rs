//! Chebyshev-basis primitives on `[-1, 1]`.
//!
//! Moment vectors are 1-based in the mathematical sense: entry `j` of a
//! [`ChebMoments`] holds the functional applied to `T_{j-1}`. In Rust the
//! storage is of course 0-based, so `entries()[k]` is the value on `T_k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Slack allowed when checking that an abscissa lies in `[-1, 1]`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Condition number above which [`moment_matrix`] flags near-singularity.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

/// Default separation between grid points and excluded abscissae.
pub const DEFAULT_GRID_TOL: f64 = 1e-8;

/// A linear functional on `C[-1, 1]` given by a (signed) measure.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalSpec {
    /// `f ↦ f(x)`.
    PointEvaluation(f64),
    /// `f ↦ (1/2) ∫_{-1}^{1} f(x) dx`.
    NormalizedIntegral,
    /// `f ↦ Σ weight · f(location)`.
    AtomicMeasure(Vec<(f64, f64)>),
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionalSpec::PointEvaluation(x) => check_domain(*x).map(|_| ()),
            FunctionalSpec::NormalizedIntegral => Ok(()),
            FunctionalSpec::AtomicMeasure(atoms) => {
                for &(x, w) in atoms {
                    check_domain(x)?;
                    if !w.is_finite() {
                        return Err(Error::invalid("atoms", format!("non-finite weight {w}")));
                    }
                }
                let locations: Vec<f64> = atoms.iter().map(|a| a.0).collect();
                check_distinct(&locations, "atoms")
            }
        }
    }

    /// Applies the functional to a function given pointwise.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match self {
            FunctionalSpec::PointEvaluation(x) => f(*x),
            FunctionalSpec::NormalizedIntegral => 0.5 * integrate(&f, -1.0, 1.0, 1e-13),
            FunctionalSpec::AtomicMeasure(atoms) => atoms.iter().map(|&(x, w)| w * f(x)).sum(),
        }
    }
}

/// Values of a functional on `T_0, …, T_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebMoments {
    entries: Vec<f64>,
}

impl ChebMoments {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("entries", "moment vector must be non-empty"));
        }
        Ok(ChebMoments { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

fn check_domain(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + DOMAIN_TOL {
        return Err(Error::Domain(x));
    }
    Ok(x.clamp(-1.0, 1.0))
}

pub(crate) fn check_distinct(points: &[f64], field: &'static str) -> Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicatePoint(w[0], field));
        }
    }
    Ok(())
}

/// `(T_0(x), …, T_{n-1}(x))` by the three-term recurrence.
pub fn cheb_values(x: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one Chebyshev value is required"));
    }
    let x = check_domain(x)?;
    let mut out = Vec::with_capacity(n);
    out.push(1.0);
    if n > 1 {
        out.push(x);
    }
    for j in 2..n {
        let next = 2.0 * x * out[j - 1] - out[j - 2];
        out.push(next);
    }
    Ok(out)
}

/// Evaluates `Σ_k coeffs[k] T_k(x)` with Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => c0 + x * b1 - b2,
        None => 0.0,
    }
}

/// Chebyshev moments `(f(T_0), …, f(T_{N-1}))` of a functional.
pub fn moments(f: &FunctionalSpec, n: usize) -> Result<ChebMoments> {
    if n == 0 {
        return Err(Error::invalid("N", "truncation level must be positive"));
    }
    f.validate()?;
    let entries = match f {
        FunctionalSpec::PointEvaluation(x) => cheb_values(*x, n)?,
        FunctionalSpec::NormalizedIntegral => (0..n)
            .map(|j| {
                let jf = j as f64;
                // T_j(x) = cos(j arccos x) stays accurate for large j.
                0.5 * integrate(&|x: f64| (jf * x.clamp(-1.0, 1.0).acos()).cos(), -1.0, 1.0, 1e-14)
            })
            .collect(),
        FunctionalSpec::AtomicMeasure(atoms) => {
            let mut acc = vec![0.0; n];
            for &(x, w) in atoms {
                for (a, t) in acc.iter_mut().zip(cheb_values(x, n)?) {
                    *a += w * t;
                }
            }
            acc
        }
    };
    ChebMoments::new(entries)
}

/// Symmetric Toeplitz matrix with first row `u`.
pub fn toeplitz(u: &[f64]) -> Result<DMatrix<f64>> {
    if u.is_empty() {
        return Err(Error::invalid("u", "Toeplitz generator must be non-empty"));
    }
    let d = u.len();
    Ok(DMatrix::from_fn(d, d, |i, j| u[i.abs_diff(j)]))
}

/// Chebyshev–Vandermonde matrix `M[j, i] = T_j(x_i)` and its conditioning.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: DMatrix<f64>,
    /// 2-norm condition number.
    pub condition: f64,
    pub ill_conditioned: bool,
}

pub fn moment_matrix(points: &[f64]) -> Result<MomentMatrix> {
    moment_matrix_with_threshold(points, DEFAULT_CONDITION_THRESHOLD)
}

pub fn moment_matrix_with_threshold(points: &[f64], threshold: f64) -> Result<MomentMatrix> {
    if points.is_empty() {
        return Err(Error::invalid("points", "at least one point is required"));
    }
    check_distinct(points, "points")?;
    let m = points.len();
    let mut matrix = DMatrix::zeros(m, m);
    for (i, &x) in points.iter().enumerate() {
        for (j, t) in cheb_values(x, m)?.into_iter().enumerate() {
            matrix[(j, i)] = t;
        }
    }
    let sv = matrix.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let ill_conditioned = condition > threshold;
    if ill_conditioned {
        log::warn!("moment matrix condition estimate {condition:.3e} exceeds {threshold:.1e}");
    }
    Ok(MomentMatrix {
        matrix,
        condition,
        ill_conditioned,
    })
}

/// The `k` Chebyshev points of the first kind, `cos(π(2j-1)/(2k))`, in
/// decreasing order.
pub fn chebyshev_nodes(k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| (PI * (2 * j - 1) as f64 / (2 * k) as f64).cos())
        .collect()
}

/// Chebyshev-distributed grid of size `k` kept away from `exclusions`.
///
/// A node within `tol` of an excluded abscissa is shifted repeatedly by
/// `+tol` (by `-tol` when that would leave `[-1, 1]`) until it clears every
/// exclusion by more than `tol`.
pub fn grid(k: usize, exclusions: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tol", "grid tolerance must be positive"));
    }
    const MAX_NUDGES: usize = 64;
    let mut out = Vec::with_capacity(k);
    for node in chebyshev_nodes(k) {
        let mut p = node;
        let mut nudges = 0;
        let step = if node + tol <= 1.0 { tol } else { -tol };
        while let Some(&e) = exclusions.iter().find(|&&e| (p - e).abs() <= tol) {
            if nudges == MAX_NUDGES {
                return Err(Error::GridSeparation {
                    point: node,
                    exclusion: e,
                    tol,
                });
            }
            p = (p + step).clamp(-1.0, 1.0);
            nudges += 1;
        }
        out.push(p);
    }
    for &p in &out {
        if let Some(&e) = exclusions.iter().find(|&&e| (p - e).abs() <= 0.5 * tol) {
            return Err(Error::GridSeparation {
                point: p,
                exclusion: e,
                tol,
            });
        }
    }
    let mut sorted = out.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if let Some(w) = sorted.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::GridSeparation {
            point: w[1],
            exclusion: w[0],
            tol,
        });
    }
    Ok(out)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: usize) -> f64 {
        let (value, err) = whole;
        if err <= tol.max(1e-15 * value.abs()) || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        let left = gk15(f, a, mid);
        let right = gk15(f, mid, b);
        recurse(f, a, mid, 0.5 * tol, left, depth - 1) + recurse(f, mid, b, 0.5 * tol, right, depth - 1)
    }
    recurse(f, a, b, tol, gk15(f, a, b), 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn cheb_values_examples() {
        assert_eq!(cheb_values(1.0, 3).unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(close(&cheb_values(0.0, 4).unwrap(), &[1.0, 0.0, -1.0, 0.0], 0.0));
        assert!(close(&cheb_values(0.5, 3).unwrap(), &[1.0, 0.5, -0.5], 1e-15));
    }

    #[test]
    fn cheb_values_rejects_bad_input() {
        assert!(matches!(cheb_values(1.0 + 1e-9, 3), Err(Error::Domain(_))));
        assert!(cheb_values(0.2, 0).is_err());
        // Within the rounding slack the point is clamped.
        assert_eq!(cheb_values(1.0 + 1e-13, 2).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn clenshaw_matches_recurrence() {
        let coeffs = [0.3, -1.2, 0.7, 0.05, -0.4];
        for &x in &[-1.0, -0.31, 0.0, 0.77, 1.0] {
            let direct: f64 = cheb_values(x, 5).unwrap().iter().zip(&coeffs).map(|(t, c)| t * c).sum();
            assert!((clenshaw(&coeffs, x) - direct).abs() < 1e-14);
        }
        assert_eq!(clenshaw(&[], 0.3), 0.0);
    }

    #[test]
    fn moments_examples() {
        let pe = moments(&FunctionalSpec::PointEvaluation(0.5), 3).unwrap();
        assert!(close(pe.entries(), &[1.0, 0.5, -0.5], 1e-15));

        let integral = moments(&FunctionalSpec::NormalizedIntegral, 5).unwrap();
        assert!(close(integral.entries(), &[1.0, 0.0, -1.0 / 3.0, 0.0, -1.0 / 15.0], 1e-13));

        let atoms = FunctionalSpec::AtomicMeasure(vec![(-1.0, 1.0), (1.0, 1.0)]);
        assert!(close(moments(&atoms, 2).unwrap().entries(), &[2.0, 0.0], 0.0));
    }

    #[test]
    fn integral_moments_match_closed_form() {
        let got = moments(&FunctionalSpec::NormalizedIntegral, 120).unwrap();
        for (j, &v) in got.entries().iter().enumerate() {
            let expected = if j % 2 == 1 { 0.0 } else { 1.0 / (1.0 - (j * j) as f64) };
            assert!((v - expected).abs() < 1e-12, "j={j}: {v} vs {expected}");
        }
    }

    #[test]
    fn moments_rejects_bad_functionals() {
        assert!(moments(&FunctionalSpec::PointEvaluation(0.0), 0).is_err());
        assert!(moments(&FunctionalSpec::PointEvaluation(1.5), 2).is_err());
        let dup = FunctionalSpec::AtomicMeasure(vec![(0.1, 1.0), (0.1, 2.0)]);
        assert!(matches!(moments(&dup, 2), Err(Error::DuplicatePoint(..))));
    }

    #[test]
    fn toeplitz_examples() {
        let t = toeplitz(&[2.0, 1.0]).unwrap();
        assert_eq!(t, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        let ones = toeplitz(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(ones, DMatrix::from_element(3, 3, 1.0));
        assert_eq!(ones.rank(1e-12), 1);
        assert!(toeplitz(&[]).is_err());

        let u = moments(&FunctionalSpec::PointEvaluation(0.3), 4).unwrap();
        let eig = toeplitz(u.entries()).unwrap().symmetric_eigenvalues();
        assert!(eig.min() > -1e-12);
    }

    #[test]
    fn moment_matrix_examples() {
        let mm = moment_matrix(&[-1.0, 1.0]).unwrap();
        assert_eq!(mm.matrix, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]));
        assert!((mm.matrix.determinant() - 2.0).abs() < 1e-14);
        assert!(!mm.ill_conditioned);

        let single = moment_matrix(&[0.0]).unwrap();
        assert_eq!(single.matrix, DMatrix::from_element(1, 1, 1.0));

        let nodes = chebyshev_nodes(5);
        let mm = moment_matrix(&nodes).unwrap();
        // At Chebyshev nodes the columns are orthogonal: M Mᵀ = diag(5, 5/2, …).
        assert!(mm.condition < 2.0, "condition {}", mm.condition);
        assert!(mm.matrix.determinant().abs() > 1.0);

        assert!(matches!(moment_matrix(&[0.2, 0.2]), Err(Error::DuplicatePoint(..))));
    }

    #[test]
    fn moment_matrix_flags_clustered_points() {
        let pts: Vec<f64> = (0..12).map(|i| 0.5 + 1e-3 * i as f64).collect();
        let mm = moment_matrix(&pts).unwrap();
        assert!(mm.ill_conditioned);
    }

    #[test]
    fn grid_examples() {
        assert!(close(&grid(1, &[], 1e-9).unwrap(), &[0.0], 1e-16));
        let g2 = grid(2, &[], 1e-9).unwrap();
        assert!(close(&g2, &[(PI / 4.0).cos(), (3.0 * PI / 4.0).cos()], 1e-15));

        let g3 = grid(3, &[0.0], 1e-6).unwrap();
        assert!(g3[1].abs() >= 5e-7, "middle node {}", g3[1]);
        assert!(g3.iter().all(|p| p.abs() > 5e-7));
        assert!(grid(0, &[0.1], 1e-8).unwrap().is_empty());
    }

    #[test]
    fn grid_nudges_away_from_right_endpoint() {
        let g = grid(1000, &[1.0, (PI / 2000.0).cos()], 1e-3).unwrap();
        assert!(g.iter().all(|&p| (-1.0..=1.0).contains(&p)));
        assert!(g.iter().all(|&p| (p - 1.0).abs() > 5e-4));
    }

    #[test]
    fn grid_rejects_impossible_separation() {
        assert!(grid(4, &[], 0.0).is_err());
        // Two exclusions bracket every attempted nudge.
        let excl: Vec<f64> = (0..200).map(|i| -1.0 + 0.01 * i as f64).collect();
        assert!(matches!(grid(5, &excl, 0.02), Err(Error::GridSeparation { .. })));
    }

    #[test]
    fn quadrature_handles_smooth_and_oscillatory_integrands() {
        let v = integrate(&|x: f64| x.exp(), -1.0, 1.0, 1e-14);
        assert!((v - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
        let v = integrate(&|x: f64| (40.0 * x).cos(), -1.0, 1.0, 1e-14);
        assert!((v - 2.0 * 40f64.sin() / 40.0).abs() < 1e-13);
    }
}
