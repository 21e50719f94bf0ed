//! Cone algebra for the interior-point solver: packed symmetric storage,
//! Jordan products, Nesterov–Todd scalings and step-length computations.
//!
//! PSD blocks use lower-triangular column-major packing with off-diagonal
//! entries scaled by √2, so the Euclidean inner product of packed vectors
//! equals the trace inner product of the matrices.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use super::{ConeBlock, ConeKind};

pub fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Packed position of entry `(i, j)` with `i >= j`.
#[inline]
pub fn packed_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    j * (2 * d - j + 1) / 2 + (i - j)
}

pub fn mat_from_packed(d: usize, x: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        m[(j, j)] = x[k];
        k += 1;
        for i in j + 1..d {
            let v = x[k] / SQRT_2;
            m[(i, j)] = v;
            m[(j, i)] = v;
            k += 1;
        }
    }
    m
}

pub fn packed_from_mat(m: &DMatrix<f64>, out: &mut [f64]) {
    let d = m.nrows();
    let mut k = 0;
    for j in 0..d {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..d {
            out[k] = SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
}

/// Barrier degree of the cone product.
pub fn degree(blocks: &[ConeBlock]) -> usize {
    blocks
        .iter()
        .map(|b| match b.kind {
            ConeKind::Nonnegative => b.rows.len(),
            ConeKind::SecondOrder => 1,
            ConeKind::Psd(d) => d,
        })
        .sum()
}

/// Identity element `e` of the cone product.
pub fn identity(blocks: &[ConeBlock], len: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    for b in blocks {
        match b.kind {
            ConeKind::Nonnegative => e[b.rows.clone()].fill(1.0),
            ConeKind::SecondOrder => e[b.rows.start] = 1.0,
            ConeKind::Psd(d) => {
                for j in 0..d {
                    e[b.rows.start + packed_index(d, j, j)] = 1.0;
                }
            }
        }
    }
    e
}

/// Smallest `t` with `u + t e` in the cone (negative when `u` is interior).
pub fn interior_shift(blocks: &[ConeBlock], u: &[f64]) -> f64 {
    let mut t = f64::NEG_INFINITY;
    for b in blocks {
        let x = &u[b.rows.clone()];
        let bt = match b.kind {
            ConeKind::Nonnegative => x.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max),
            ConeKind::SecondOrder => norm(&x[1..]) - x[0],
            ConeKind::Psd(d) => -mat_from_packed(d, x).symmetric_eigenvalues().min(),
        };
        t = t.max(bt);
    }
    t
}

/// Jordan product `u ∘ v`.
pub fn jordan(blocks: &[ConeBlock], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for b in blocks {
        let r = b.rows.clone();
        let (x, y) = (&u[r.clone()], &v[r.clone()]);
        let o = &mut out[r];
        match b.kind {
            ConeKind::Nonnegative => {
                for i in 0..x.len() {
                    o[i] = x[i] * y[i];
                }
            }
            ConeKind::SecondOrder => {
                o[0] = dot(x, y);
                for i in 1..x.len() {
                    o[i] = x[0] * y[i] + y[0] * x[i];
                }
            }
            ConeKind::Psd(d) => {
                let xm = mat_from_packed(d, x);
                let ym = mat_from_packed(d, y);
                let p = &xm * &ym;
                let sym = (&p + p.transpose()) * 0.5;
                packed_from_mat(&sym, o);
            }
        }
    }
    out
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Which linear map of a Nesterov–Todd scaling to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingOp {
    W,
    WT,
    WInv,
    WInvT,
}

#[derive(Debug, Clone)]
enum BlockScaling {
    /// `W = diag(d)`.
    Nonneg { d: Vec<f64> },
    /// `W = η (2 w wᵀ − J)` with `wᵀ J w = 1`.
    Soc { eta: f64, w: Vec<f64> },
    /// `W(X) = rᵀ X r`; `lam` holds the diagonal of the scaled point.
    Psd {
        r: DMatrix<f64>,
        rinv: DMatrix<f64>,
        lam: Vec<f64>,
    },
}

/// Nesterov–Todd scaling at a strictly interior pair `(s, z)`:
/// `λ = W z = W⁻ᵀ s`.
#[derive(Debug, Clone)]
pub struct Scaling {
    blocks: Vec<(ConeBlock, BlockScaling)>,
    lambda: Vec<f64>,
}

impl Scaling {
    pub fn identity(blocks: &[ConeBlock], len: usize) -> Self {
        let lambda = identity(blocks, len);
        let blocks = blocks
            .iter()
            .map(|b| {
                let bs = match b.kind {
                    ConeKind::Nonnegative => BlockScaling::Nonneg {
                        d: vec![1.0; b.rows.len()],
                    },
                    ConeKind::SecondOrder => {
                        let mut w = vec![0.0; b.rows.len()];
                        w[0] = 1.0;
                        BlockScaling::Soc { eta: 1.0, w }
                    }
                    ConeKind::Psd(d) => BlockScaling::Psd {
                        r: DMatrix::identity(d, d),
                        rinv: DMatrix::identity(d, d),
                        lam: vec![1.0; d],
                    },
                };
                (b.clone(), bs)
            })
            .collect();
        Scaling { blocks, lambda }
    }

    /// Returns `None` when `s` or `z` is not strictly interior.
    pub fn compute(blocks: &[ConeBlock], s: &[f64], z: &[f64]) -> Option<Self> {
        let mut lambda = vec![0.0; s.len()];
        let mut out = Vec::with_capacity(blocks.len());
        for b in blocks {
            let r = b.rows.clone();
            let (sb, zb) = (&s[r.clone()], &z[r.clone()]);
            let bs = match b.kind {
                ConeKind::Nonnegative => {
                    let mut d = Vec::with_capacity(sb.len());
                    for i in 0..sb.len() {
                        if !(sb[i] > 0.0 && zb[i] > 0.0) {
                            return None;
                        }
                        d.push((sb[i] / zb[i]).sqrt());
                        lambda[r.start + i] = (sb[i] * zb[i]).sqrt();
                    }
                    BlockScaling::Nonneg { d }
                }
                ConeKind::SecondOrder => {
                    let (bs, lz) = soc_scaling(sb, zb)?;
                    lambda[r.clone()].copy_from_slice(&lz);
                    bs
                }
                ConeKind::Psd(d) => {
                    let sm = mat_from_packed(d, sb);
                    let zm = mat_from_packed(d, zb);
                    let ls = sm.cholesky()?.l();
                    let lz = zm.cholesky()?.l();
                    let (u, sig, vt) = svd_factors(&(lz.transpose() * &ls))?;
                    let inv_sqrt = DVector::from_iterator(d, sig.iter().map(|v| 1.0 / v.sqrt()));
                    let sqrt_inv = DMatrix::from_diagonal(&inv_sqrt);
                    let rmat = &ls * vt.transpose() * &sqrt_inv;
                    let rinv = &sqrt_inv * u.transpose() * lz.transpose();
                    for (j, &l) in sig.iter().enumerate() {
                        lambda[r.start + packed_index(d, j, j)] = l;
                    }
                    BlockScaling::Psd { r: rmat, rinv, lam: sig }
                }
            };
            out.push((b.clone(), bs));
        }
        Some(Scaling { blocks: out, lambda })
    }

    /// Scaling at the new pair `(Wᵀ s̃, W⁻¹ z̃)` given in scaled coordinates
    /// of the current scaling. Avoids refactoring ill-conditioned iterates:
    /// PSD and nonnegative blocks are updated multiplicatively.
    /// Next scaling from the stepped point. PSD blocks are updated from the
    /// scaled coordinates `(λ + αΔs̃, λ + αΔz̃)`, which stays accurate when
    /// `W` is badly conditioned; the other blocks are recomputed from the
    /// unscaled `(s, z)`.
    pub fn update(&self, s_scaled: &[f64], z_scaled: &[f64], s_raw: &[f64], z_raw: &[f64]) -> Option<Self> {
        let mut lambda = vec![0.0; s_scaled.len()];
        let mut out = Vec::with_capacity(self.blocks.len());
        for (b, bs) in &self.blocks {
            let r = b.rows.clone();
            let (sb, zb) = (&s_scaled[r.clone()], &z_scaled[r.clone()]);
            let nbs = match (b.kind, bs) {
                (ConeKind::Nonnegative, _) => {
                    let (sb, zb) = (&s_raw[r.clone()], &z_raw[r.clone()]);
                    let mut nd = Vec::with_capacity(sb.len());
                    for i in 0..sb.len() {
                        if !(sb[i] > 0.0 && zb[i] > 0.0) {
                            return None;
                        }
                        nd.push((sb[i] / zb[i]).sqrt());
                        lambda[r.start + i] = (sb[i] * zb[i]).sqrt();
                    }
                    BlockScaling::Nonneg { d: nd }
                }
                (ConeKind::Psd(d), BlockScaling::Psd { r: rm, rinv, .. }) => {
                    let ls = mat_from_packed(d, sb).cholesky()?.l();
                    let lz = mat_from_packed(d, zb).cholesky()?.l();
                    let (u, sig, vt) = svd_factors(&(lz.transpose() * &ls))?;
                    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(d, sig.iter().map(|v| 1.0 / v.sqrt())));
                    let nr = rm * &ls * vt.transpose() * &inv_sqrt;
                    let nrinv = &inv_sqrt * u.transpose() * lz.transpose() * rinv;
                    for (j, &l) in sig.iter().enumerate() {
                        lambda[r.start + packed_index(d, j, j)] = l;
                    }
                    BlockScaling::Psd {
                        r: nr,
                        rinv: nrinv,
                        lam: sig,
                    }
                }
                (ConeKind::SecondOrder, _) => {
                    let (nbs, lz) = soc_scaling(&s_raw[r.clone()], &z_raw[r.clone()])?;
                    lambda[r].copy_from_slice(&lz);
                    nbs
                }
                _ => unreachable!("scaling kind mismatches cone kind"),
            };
            out.push((b.clone(), nbs));
        }
        Some(Scaling { blocks: out, lambda })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn apply(&self, op: ScalingOp, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (b, bs) in &self.blocks {
            let y = apply_block(bs, op, &x[b.rows.clone()]);
            out[b.rows.clone()].copy_from_slice(&y);
        }
        out
    }

    /// Solves `λ ∘ x = r` for `x`.
    pub fn lambda_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        for (b, bs) in &self.blocks {
            let r = b.rows.clone();
            let lam = &self.lambda[r.clone()];
            let x = &rhs[r.clone()];
            let o = &mut out[r];
            match (b.kind, bs) {
                (ConeKind::Nonnegative, _) => {
                    for i in 0..x.len() {
                        o[i] = x[i] / lam[i];
                    }
                }
                (ConeKind::SecondOrder, _) => {
                    let l0 = lam[0];
                    let l1 = &lam[1..];
                    let denom = l0 * l0 - dot(l1, l1);
                    let x0 = (l0 * x[0] - dot(l1, &x[1..])) / denom;
                    o[0] = x0;
                    for i in 1..x.len() {
                        o[i] = (x[i] - x0 * lam[i]) / l0;
                    }
                }
                (ConeKind::Psd(d), BlockScaling::Psd { lam, .. }) => {
                    let mut k = 0;
                    for j in 0..d {
                        for i in j..d {
                            o[k] = 2.0 * x[k] / (lam[i] + lam[j]);
                            k += 1;
                        }
                    }
                }
                _ => unreachable!("scaling kind mismatches cone kind"),
            }
        }
        out
    }

    /// Largest `α` with `λ + α d` in the cone (infinity if unbounded).
    pub fn max_step(&self, dir: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for (b, bs) in &self.blocks {
            let r = b.rows.clone();
            let lam = &self.lambda[r.clone()];
            let d = &dir[r];
            let a = match (b.kind, bs) {
                (ConeKind::Nonnegative, _) => lam
                    .iter()
                    .zip(d)
                    .filter(|(_, &di)| di < 0.0)
                    .map(|(&li, &di)| -li / di)
                    .fold(f64::INFINITY, f64::min),
                (ConeKind::SecondOrder, _) => soc_max_step(lam, d),
                (ConeKind::Psd(dim), BlockScaling::Psd { lam, .. }) => {
                    let dm = mat_from_packed(dim, d);
                    let scaled = DMatrix::from_fn(dim, dim, |i, j| dm[(i, j)] / (lam[i] * lam[j]).sqrt());
                    let emin = scaled.symmetric_eigenvalues().min();
                    if emin < 0.0 {
                        -1.0 / emin
                    } else {
                        f64::INFINITY
                    }
                }
                _ => unreachable!("scaling kind mismatches cone kind"),
            };
            alpha = alpha.min(a);
        }
        alpha
    }

    /// `Ĝ = W⁻ᵀ G` restricted to one SOC or PSD block, for the columns in
    /// `cols`; `block_cols[k]` lists `(row offset in block, value)` for
    /// column `cols[k]`. Returns a dense `(block len) × cols.len()` matrix.
    pub fn scaled_block_columns(&self, block: usize, block_cols: &[Vec<(usize, f64)>]) -> DMatrix<f64> {
        use rayon::prelude::*;
        let (b, bs) = &self.blocks[block];
        let len = b.rows.len();
        let columns: Vec<Vec<f64>> = block_cols
            .par_iter()
            .map(|entries| {
                let mut g = vec![0.0; len];
                for &(i, v) in entries {
                    g[i] += v;
                }
                apply_block(bs, ScalingOp::WInvT, &g)
            })
            .collect();
        DMatrix::from_fn(len, columns.len(), |i, j| columns[j][i])
    }

    /// Inverse scaling weights for a nonnegative block (`1/d_i`).
    pub fn nonneg_inv_weights(&self, block: usize) -> Option<Vec<f64>> {
        match &self.blocks[block].1 {
            BlockScaling::Nonneg { d } => Some(d.iter().map(|v| 1.0 / v).collect()),
            _ => None,
        }
    }
}

fn svd_factors(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (r, c) = m.shape();
    let svd = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]).svd().ok()?;
    let (u, v) = (svd.U(), svd.V());
    let sig: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    if sig.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    Some((DMatrix::from_fn(r, r, |i, j| u[(i, j)]), sig, DMatrix::from_fn(c, c, |i, j| v[(j, i)])))
}

/// NT scaling of one second-order block and its `λ = W z`.
fn soc_scaling(sb: &[f64], zb: &[f64]) -> Option<(BlockScaling, Vec<f64>)> {
    let sn = soc_jnorm(sb)?;
    let zn = soc_jnorm(zb)?;
    let sbar: Vec<f64> = sb.iter().map(|v| v / sn).collect();
    let zbar: Vec<f64> = zb.iter().map(|v| v / zn).collect();
    let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
    let mut w: Vec<f64> = sbar.iter().zip(&zbar).map(|(a, b)| (a - b) / (2.0 * gamma)).collect();
    w[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
    // Reflect w (with wᵀJw = 1) to v = (w + e)/√(2(w₀ + 1)), which gives
    // W = η(2vvᵀ − J).
    w[0] += 1.0;
    let scale = (2.0 * w[0]).sqrt();
    for v in &mut w {
        *v /= scale;
    }
    let bs = BlockScaling::Soc {
        eta: (sn / zn).sqrt(),
        w,
    };
    let lz = apply_block(&bs, ScalingOp::W, zb);
    Some((bs, lz))
}

fn soc_jnorm(x: &[f64]) -> Option<f64> {
    let q = (x[0] - norm(&x[1..])) * (x[0] + norm(&x[1..]));
    if x[0] > 0.0 && q > 0.0 {
        Some(q.sqrt())
    } else {
        None
    }
}

fn soc_max_step(lam: &[f64], d: &[f64]) -> f64 {
    // f(α) = (λ0 + α d0)² − ‖λ1 + α d1‖²; the first positive root is where
    // the ray leaves the cone.
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = lam[0] * d[0] - dot(&lam[1..], &d[1..]);
    let c = lam[0] * lam[0] - dot(&lam[1..], &lam[1..]);
    let mut best = f64::INFINITY;
    let mut consider = |r: f64| {
        if r > 0.0 && r.is_finite() {
            best = best.min(r);
        }
    };
    if a.abs() < 1e-300 {
        if b < 0.0 {
            consider(-c / (2.0 * b));
        }
    } else {
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let q = -(b + b.signum() * disc.sqrt());
            if q != 0.0 {
                consider(q / a);
                consider(c / q);
            } else {
                consider((c / a).abs().sqrt());
            }
        }
    }
    if d[0] < 0.0 {
        best = best.min(-lam[0] / d[0]);
    }
    best
}

fn apply_block(bs: &BlockScaling, op: ScalingOp, x: &[f64]) -> Vec<f64> {
    match bs {
        BlockScaling::Nonneg { d } => match op {
            ScalingOp::W | ScalingOp::WT => x.iter().zip(d).map(|(a, b)| a * b).collect(),
            ScalingOp::WInv | ScalingOp::WInvT => x.iter().zip(d).map(|(a, b)| a / b).collect(),
        },
        BlockScaling::Soc { eta, w } => match op {
            ScalingOp::W | ScalingOp::WT => {
                let wx = dot(w, x);
                let mut out: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| eta * (2.0 * wi * wx + xi)).collect();
                out[0] = eta * (2.0 * w[0] * wx - x[0]);
                out
            }
            ScalingOp::WInv | ScalingOp::WInvT => {
                // W⁻¹ = (2 J w wᵀ J − J) / η
                let wjx = w[0] * x[0] - dot(&w[1..], &x[1..]);
                let mut out: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| (-2.0 * wi * wjx + xi) / eta).collect();
                out[0] = (2.0 * w[0] * wjx - x[0]) / eta;
                out
            }
        },
        BlockScaling::Psd { r, rinv, .. } => {
            let d = r.nrows();
            let xm = mat_from_packed(d, x);
            let ym = match op {
                ScalingOp::W => r.transpose() * xm * r,
                ScalingOp::WT => r * xm * r.transpose(),
                ScalingOp::WInv => rinv.transpose() * xm * rinv,
                ScalingOp::WInvT => rinv * xm * rinv.transpose(),
            };
            let mut out = vec![0.0; x.len()];
            packed_from_mat(&ym, &mut out);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks() -> Vec<ConeBlock> {
        vec![
            ConeBlock {
                kind: ConeKind::Nonnegative,
                rows: 0..2,
            },
            ConeBlock {
                kind: ConeKind::SecondOrder,
                rows: 2..5,
            },
            ConeBlock {
                kind: ConeKind::Psd(3),
                rows: 5..11,
            },
        ]
    }

    fn interior_points() -> (Vec<f64>, Vec<f64>) {
        let mut s = vec![0.5, 2.0, 3.0, 1.0, -1.5];
        let mut z = vec![1.5, 0.25, 1.0, -0.3, 0.2];
        let sm = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.7]);
        let zm = DMatrix::from_row_slice(3, 3, &[1.0, -0.4, 0.0, -0.4, 0.9, 0.1, 0.0, 0.1, 1.6]);
        let mut ps = vec![0.0; 6];
        let mut pz = vec![0.0; 6];
        packed_from_mat(&sm, &mut ps);
        packed_from_mat(&zm, &mut pz);
        s.extend(ps);
        z.extend(pz);
        (s, z)
    }

    #[test]
    fn packing_preserves_trace_inner_product() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, -1.0, 0.5, 3.0, 0.5, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[0.2, -1.0, 0.0, -1.0, 2.0, 1.0, 0.0, 1.0, 3.0]);
        let mut pa = vec![0.0; 6];
        let mut pb = vec![0.0; 6];
        packed_from_mat(&a, &mut pa);
        packed_from_mat(&b, &mut pb);
        assert!((dot(&pa, &pb) - (&a * &b).trace()).abs() < 1e-12);
        assert_eq!(mat_from_packed(3, &pa), a);
        assert_eq!(packed_index(3, 1, 0), 1);
        assert_eq!(packed_index(3, 1, 1), 3);
        assert_eq!(packed_index(3, 2, 2), 5);
        assert_eq!(packed_index(4, 3, 2), 8);
    }

    #[test]
    fn nt_scaling_maps_both_points_to_lambda() {
        let bl = blocks();
        let (s, z) = interior_points();
        let w = Scaling::compute(&bl, &s, &z).expect("interior");
        let wz = w.apply(ScalingOp::W, &z);
        let wts = w.apply(ScalingOp::WInvT, &s);
        for i in 0..s.len() {
            assert!((wz[i] - w.lambda()[i]).abs() < 1e-10, "Wz[{i}]");
            assert!((wts[i] - w.lambda()[i]).abs() < 1e-10, "W^-T s[{i}]");
        }
        // Inverse pairs.
        let x: Vec<f64> = (0..s.len()).map(|i| (i as f64 * 0.7).sin()).collect();
        let back = w.apply(ScalingOp::WInv, &w.apply(ScalingOp::W, &x));
        let back_t = w.apply(ScalingOp::WInvT, &w.apply(ScalingOp::WT, &x));
        for i in 0..x.len() {
            assert!((back[i] - x[i]).abs() < 1e-10);
            assert!((back_t[i] - x[i]).abs() < 1e-10);
        }
        // Adjoint: <W x, y> = <x, Wᵀ y>.
        let y: Vec<f64> = (0..s.len()).map(|i| (i as f64 * 1.3).cos()).collect();
        let lhs = dot(&w.apply(ScalingOp::W, &x), &y);
        let rhs = dot(&x, &w.apply(ScalingOp::WT, &y));
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn lambda_solve_inverts_jordan_product() {
        let bl = blocks();
        let (s, z) = interior_points();
        let w = Scaling::compute(&bl, &s, &z).unwrap();
        let rhs: Vec<f64> = (0..s.len()).map(|i| 0.3 - 0.1 * i as f64).collect();
        let x = w.lambda_solve(&rhs);
        let back = jordan(&bl, w.lambda(), &x);
        for i in 0..rhs.len() {
            assert!((back[i] - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn max_step_reaches_boundary() {
        let bl = blocks();
        let (s, z) = interior_points();
        let w = Scaling::compute(&bl, &s, &z).unwrap();
        let dir: Vec<f64> = (0..s.len()).map(|i| -0.4 + 0.05 * (i as f64).cos()).collect();
        let a = w.max_step(&dir);
        assert!(a.is_finite() && a > 0.0);
        let at = |t: f64| -> Vec<f64> { w.lambda().iter().zip(&dir).map(|(l, d)| l + t * d).collect() };
        assert!(interior_shift(&bl, &at(0.999 * a)) < 0.0);
        assert!(interior_shift(&bl, &at(1.001 * a)) > 0.0);
        assert!(interior_shift(&bl, &at(a)).abs() < 1e-9);
    }

    #[test]
    fn identity_is_neutral() {
        let bl = blocks();
        let e = identity(&bl, 11);
        let (s, _) = interior_points();
        let p = jordan(&bl, &e, &s);
        for i in 0..s.len() {
            assert!((p[i] - s[i]).abs() < 1e-12);
        }
        assert_eq!(degree(&bl), 2 + 1 + 3);
    }
}
