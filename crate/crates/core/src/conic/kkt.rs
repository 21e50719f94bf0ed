//! Reduced KKT systems of the form
//!
//! ```text
//! [ 0  Aᵀ  Gᵀ   ] [x]   [r1]
//! [ A  0   0    ] [y] = [r2]
//! [ G  0  -WᵀW  ] [z]   [r3]
//! ```
//!
//! solved by eliminating `z`, which leaves `[H Aᵀ; A 0]` with `H = MᵀM`
//! and `M = W⁻ᵀG`. The equilibrated augmented matrix is factored by LU
//! with partial pivoting. For problems without semidefinite blocks an
//! inaccurate LU solve is retried in the null space of `A`: with
//! `Aᵀ = [Q₁ Z] [R_a; 0]` the solution is `x = Q₁R_a⁻ᵀr₂ + Zu`, and `u`
//! solves a least-squares type system factored by QR of `MZ`, so `H` is
//! never formed. Refinement always measures residuals of the exact system.

use std::cell::OnceCell;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use nalgebra::{DMatrix, DVector};

use super::cones::{ScalingOp, Scaling};
use super::ipm::Data;
use super::ConeKind;

const REFINE_STEPS: usize = 6;
const RUIZ_PASSES: usize = 8;
/// Relative residual above which the LU solve is retried by QR.
const FALLBACK_RESIDUAL: f64 = 1e-9;

/// Symmetric Ruiz equilibration in place; returns the diagonal `D` with
/// the matrix replaced by `D K D`.
fn ruiz(k: &mut DMatrix<f64>) -> DVector<f64> {
    let n = k.nrows();
    let mut d = DVector::from_element(n, 1.0);
    for _ in 0..RUIZ_PASSES {
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let m = k.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m > 0.0 {
                    1.0 / m.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        for j in 0..n {
            for i in 0..n {
                k[(i, j)] *= f[i] * f[j];
            }
        }
        for i in 0..n {
            d[i] *= f[i];
        }
    }
    d
}

/// Adds `MᵀM` to the leading block of `k`, skipping zeros of `M`.
fn gram_into(m: &DMatrix<f64>, k: &mut DMatrix<f64>) {
    let n = m.ncols();
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(n);
    for r in 0..m.nrows() {
        nz.clear();
        nz.extend((0..n).map(|j| (j, m[(r, j)])).filter(|&(_, v)| v != 0.0));
        for &(j, vj) in &nz {
            for &(i, vi) in &nz {
                k[(i, j)] += vi * vj;
            }
        }
    }
}

struct QrFactor {
    /// Orthonormal basis of the range of `Aᵀ` and the triangular `R_a`.
    q1: DMatrix<f64>,
    ra: DMatrix<f64>,
    /// Orthonormal basis of the null space of `A`.
    z: DMatrix<f64>,
    /// Triangular factor of `MZ`.
    r: DMatrix<f64>,
}

struct LuFactor {
    /// LU factors of `D [H Aᵀ; A 0] D`.
    lu: PartialPivLu<f64>,
    equil: DVector<f64>,
}

pub(super) struct KktFactor<'a> {
    data: &'a Data,
    scaling: &'a Scaling,
    /// `M = W⁻ᵀG`, densely.
    m: DMatrix<f64>,
    qr: OnceCell<Option<QrFactor>>,
    lu: OnceCell<Option<LuFactor>>,
    /// QR fallback is only used without semidefinite blocks.
    allow_qr: bool,
}

fn nonsingular_triangle(r: &DMatrix<f64>) -> bool {
    let big = (0..r.nrows()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    (0..r.nrows()).all(|i| r[(i, i)].abs() > 1e-14 * big)
}

impl<'a> KktFactor<'a> {
    pub fn new(data: &'a Data, scaling: &'a Scaling) -> Option<Self> {
        let n = data.n;
        let rows = data.h.len();
        let mut m = DMatrix::<f64>::zeros(rows, n);
        for (bi, block) in data.blocks.iter().enumerate() {
            match block.kind {
                ConeKind::Nonnegative => {
                    let iw = scaling.nonneg_inv_weights(bi)?;
                    for (r, row) in block.rows.clone().enumerate() {
                        for (j, v) in data.g.row(row) {
                            m[(row, j)] += iw[r] * v;
                        }
                    }
                }
                ConeKind::SecondOrder | ConeKind::Psd(_) => {
                    let (cols, entries) = &data.block_cols[bi];
                    if cols.is_empty() {
                        continue;
                    }
                    let gh = scaling.scaled_block_columns(bi, entries);
                    for (c, &j) in cols.iter().enumerate() {
                        for (r, row) in block.rows.clone().enumerate() {
                            m[(row, j)] = gh[(r, c)];
                        }
                    }
                }
            }
        }
        let allow_qr = !data.blocks.iter().any(|b| matches!(b.kind, ConeKind::Psd(_)));
        let f = KktFactor {
            data,
            scaling,
            m,
            qr: OnceCell::new(),
            lu: OnceCell::new(),
            allow_qr,
        };
        if f.lu_factor().is_none() && f.qr_factor().is_none() {
            return None;
        }
        Some(f)
    }

    fn factor_qr(data: &Data, m: &DMatrix<f64>) -> Option<QrFactor> {
        let (n, p) = (data.n, data.p);
        if p > n || m.nrows() < n - p {
            return None;
        }
        let (q1, ra, z) = if p > 0 {
            // Zero columns complete the Householder QR to a full basis.
            let mut padded = DMatrix::<f64>::zeros(n, n);
            padded.columns_mut(0, p).copy_from(&data.a_dense.transpose());
            let qr = padded.qr();
            let q = qr.q();
            let ra = qr.r().view((0, 0), (p, p)).into_owned();
            if !nonsingular_triangle(&ra) {
                return None;
            }
            (q.columns(0, p).into_owned(), ra, q.columns(p, n - p).into_owned())
        } else {
            (DMatrix::zeros(n, 0), DMatrix::zeros(0, 0), DMatrix::identity(n, n))
        };
        let r = if n > p {
            let r = (m * &z).qr().r();
            if !nonsingular_triangle(&r) {
                return None;
            }
            r
        } else {
            DMatrix::zeros(0, 0)
        };
        Some(QrFactor { q1, ra, z, r })
    }

    fn qr_factor(&self) -> Option<&QrFactor> {
        if !self.allow_qr {
            return None;
        }
        self.qr.get_or_init(|| Self::factor_qr(self.data, &self.m)).as_ref()
    }

    fn lu_factor(&self) -> Option<&LuFactor> {
        self.lu
            .get_or_init(|| {
                let d = self.data;
                let (n, p) = (d.n, d.p);
                let mut k = DMatrix::<f64>::zeros(n + p, n + p);
                gram_into(&self.m, &mut k);
                for i in 0..p {
                    for j in 0..n {
                        let v = d.a_dense[(i, j)];
                        k[(n + i, j)] = v;
                        k[(j, n + i)] = v;
                    }
                }
                let equil = ruiz(&mut k);
                let scale = (0..n + p).map(|i| k[(i, i)].abs()).fold(1.0, f64::max);
                for delta in [0.0, 1e-12, 1e-10, 1e-8] {
                    let mut kr = k.clone();
                    for i in 0..n + p {
                        kr[(i, i)] += if i < n { delta * scale } else { -delta * scale };
                    }
                    let lu = Mat::<f64>::from_fn(n + p, n + p, |i, j| kr[(i, j)]).partial_piv_lu();
                    let u = lu.U();
                    if (0..n + p).all(|i| u[(i, i)] != 0.0 && u[(i, i)].is_finite()) {
                        if delta > 0.0 {
                            log::debug!("KKT matrix regularized by {:.1e}", delta * scale);
                        }
                        return Some(LuFactor { lu, equil });
                    }
                }
                None
            })
            .as_ref()
    }

    /// `(x, y)` from `[H Aᵀ; A 0] (x, y) = (rhs1, r2)`.
    fn solve_xy(&self, use_lu: bool, rhs1: Vec<f64>, r2: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let d = self.data;
        let zeros = || (DVector::zeros(d.n), DVector::zeros(d.p));
        if use_lu {
            let Some(f) = self.lu_factor() else {
                return zeros();
            };
            let mut rhs = rhs1;
            rhs.extend_from_slice(r2);
            let rhs = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i] * f.equil[i]);
            let sol = f.lu.solve(&rhs);
            let sol = DVector::from_fn(d.n + d.p, |i, _| sol[(i, 0)] * f.equil[i]);
            return (sol.rows(0, d.n).into_owned(), sol.rows(d.n, d.p).into_owned());
        }
        let Some(f) = self.qr_factor() else {
            return zeros();
        };
        let rhs1 = DVector::from_vec(rhs1);
        let h_mul = |v: &DVector<f64>| self.m.tr_mul(&(&self.m * v));
        let mut x = match f.ra.tr_solve_upper_triangular(&DVector::from_column_slice(r2)) {
            Some(t) => &f.q1 * t,
            None => return zeros(),
        };
        if f.r.nrows() > 0 {
            let t = f.z.tr_mul(&(&rhs1 - h_mul(&x)));
            match f.r.tr_solve_upper_triangular(&t).and_then(|v| f.r.solve_upper_triangular(&v)) {
                Some(u) => x += &f.z * u,
                None => return zeros(),
            }
        }
        let y = if d.p > 0 {
            match f.ra.solve_upper_triangular(&f.q1.tr_mul(&(&rhs1 - h_mul(&x)))) {
                Some(y) => y,
                None => return zeros(),
            }
        } else {
            DVector::zeros(0)
        };
        (x, y)
    }

    /// Direct solve with the third block given as `q3 = W⁻ᵀ r3`.
    fn solve_once(&self, use_lu: bool, r1: &[f64], r2: &[f64], q3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = self.data;
        let winv_q3 = self.scaling.apply(ScalingOp::WInv, q3);
        let mut rhs1 = r1.to_vec();
        d.g.tmul_add(&winv_q3, &mut rhs1);
        let (x, y) = self.solve_xy(use_lu, rhs1, r2);
        let gx = d.g.mul_vec(x.as_slice());
        let mut zt = self.scaling.apply(ScalingOp::WInvT, &gx);
        for (v, q) in zt.iter_mut().zip(q3) {
            *v -= q;
        }
        let z = self.scaling.apply(ScalingOp::WInv, &zt);
        (x.data.into(), y.data.into(), z)
    }

    /// Residual with the third block in scaled form `q3 − W⁻ᵀGx + Wz`.
    fn residual(&self, r: (&[f64], &[f64], &[f64]), sol: (&[f64], &[f64], &[f64])) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = self.data;
        let (x, y, z) = sol;
        let mut e1 = r.0.to_vec();
        let mut lhs1 = d.a.tmul_vec(y);
        d.g.tmul_add(z, &mut lhs1);
        for (e, l) in e1.iter_mut().zip(lhs1) {
            *e -= l;
        }
        let ax = d.a.mul_vec(x);
        let e2: Vec<f64> = r.1.iter().zip(ax).map(|(a, b)| a - b).collect();
        let wigx = self.scaling.apply(ScalingOp::WInvT, &d.g.mul_vec(x));
        let wz = self.scaling.apply(ScalingOp::W, z);
        let e3: Vec<f64> = r.2.iter().zip(wigx.iter().zip(&wz)).map(|(a, (g, w))| a - g + w).collect();
        (e1, e2, e3)
    }

    fn refined(&self, use_lu: bool, r1: &[f64], r2: &[f64], q3: &[f64]) -> ((Vec<f64>, Vec<f64>, Vec<f64>), f64) {
        let (mut x, mut y, mut z) = self.solve_once(use_lu, r1, r2, q3);
        let mut prev = f64::INFINITY;
        for _ in 0..=REFINE_STEPS {
            let (e1, e2, e3) = self.residual((r1, r2, q3), (&x, &y, &z));
            let size = e1.iter().chain(&e2).chain(&e3).fold(0.0f64, |m, v| m.max(v.abs()));
            log::trace!("kkt refine residual {size:.3e}");
            if size == 0.0 || size > 0.5 * prev {
                return ((x, y, z), size.min(prev));
            }
            prev = size;
            let (dx, dy, dz) = self.solve_once(use_lu, &e1, &e2, &e3);
            x.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
            y.iter_mut().zip(dy).for_each(|(a, b)| *a += b);
            z.iter_mut().zip(dz).for_each(|(a, b)| *a += b);
        }
        let (e1, e2, e3) = self.residual((r1, r2, q3), (&x, &y, &z));
        let size = e1.iter().chain(&e2).chain(&e3).fold(0.0f64, |m, v| m.max(v.abs()));
        ((x, y, z), size)
    }

    /// Solves the KKT system with iterative refinement.
    pub fn solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let q3 = self.scaling.apply(ScalingOp::WInvT, r3);
        let scale = r1.iter().chain(r2).chain(&q3).fold(1.0f64, |m, v| m.max(v.abs()));
        if self.lu_factor().is_some() {
            let (sol, res) = self.refined(true, r1, r2, &q3);
            if res <= FALLBACK_RESIDUAL * scale || self.qr_factor().is_none() {
                return sol;
            }
            log::trace!("LU solve residual {res:.2e}; retrying with QR");
            let (alt, alt_res) = self.refined(false, r1, r2, &q3);
            return if alt_res < res { alt } else { sol };
        }
        self.refined(false, r1, r2, &q3).0
    }
}
