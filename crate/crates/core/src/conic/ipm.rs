//! Primal-dual interior-point method on the homogeneous self-dual embedding
//! with Nesterov–Todd scaling and a Mehrotra predictor-corrector step.
//!
//! Internal form:
//!
//! ```text
//! minimize cᵀx  subject to  A x = b,  G x + s = h,  s ∈ K
//! maximize −bᵀy − hᵀz  subject to  Aᵀy + Gᵀz + c = 0,  z ∈ K
//! ```

use nalgebra::DMatrix;

use super::cones::{self, dot, jordan, norm, ScalingOp, Scaling};
use super::kkt::KktFactor;
use super::sparse::CsrMatrix;
use super::{ConeBlock, ConeKind, SolveStatus};

const STEP: f64 = 0.99;
const EXPON: i32 = 3;

pub(super) struct Data {
    pub n: usize,
    pub p: usize,
    pub c: Vec<f64>,
    pub a: CsrMatrix,
    pub a_dense: DMatrix<f64>,
    pub b: Vec<f64>,
    pub g: CsrMatrix,
    pub h: Vec<f64>,
    pub blocks: Vec<ConeBlock>,
    /// For SOC/PSD blocks: touched columns and, per column, its entries as
    /// `(row offset within block, value)`.
    pub block_cols: Vec<(Vec<usize>, Vec<Vec<(usize, f64)>>)>,
}

impl Data {
    pub fn new(c: Vec<f64>, a: CsrMatrix, b: Vec<f64>, g: CsrMatrix, h: Vec<f64>, blocks: Vec<ConeBlock>) -> Self {
        let n = c.len();
        let p = a.nrows();
        let mut a_dense = DMatrix::zeros(p, n);
        for (i, j, v) in a.triplets() {
            a_dense[(i, j)] = v;
        }
        let block_cols = blocks
            .iter()
            .map(|blk| {
                if blk.kind == ConeKind::Nonnegative {
                    return (Vec::new(), Vec::new());
                }
                let mut per_col: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
                for (off, row) in blk.rows.clone().enumerate() {
                    for (j, v) in g.row(row) {
                        per_col.entry(j).or_default().push((off, v));
                    }
                }
                let cols: Vec<usize> = per_col.keys().copied().collect();
                let entries: Vec<Vec<(usize, f64)>> = per_col.into_values().collect();
                (cols, entries)
            })
            .collect();
        Data {
            n,
            p,
            c,
            a,
            a_dense,
            b,
            g,
            h,
            blocks,
            block_cols,
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct RawSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    pcost: f64,
    dcost: f64,
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    rt: f64,
}

impl Metrics {
    fn worst(&self) -> f64 {
        self.pres.max(self.dres).max(self.gap)
    }
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn neg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

fn metrics(d: &Data, it: &Iterate, norms: (f64, f64, f64)) -> Metrics {
    let (cn, bn, hn) = norms;
    let mut rx = d.a.tmul_vec(&it.y);
    d.g.tmul_add(&it.z, &mut rx);
    axpy(it.tau, &d.c, &mut rx);
    let ax = d.a.mul_vec(&it.x);
    let ry: Vec<f64> = d.b.iter().zip(&ax).map(|(b, a)| b * it.tau - a).collect();
    let gx = d.g.mul_vec(&it.x);
    let rz: Vec<f64> = (0..d.h.len()).map(|i| d.h[i] * it.tau - gx[i] - it.s[i]).collect();
    let cx = dot(&d.c, &it.x);
    let by_hz = dot(&d.b, &it.y) + dot(&d.h, &it.z);
    let rt = -cx - by_hz - it.kappa;
    let pcost = cx / it.tau;
    let dcost = -by_hz / it.tau;
    let pres = (norm(&ry) / bn).max(norm(&rz) / hn) / it.tau;
    let dres = norm(&rx) / cn / it.tau;
    let sz = dot(&it.s, &it.z) / (it.tau * it.tau);
    let gap = sz.max((pcost - dcost).abs()) / pcost.abs().max(1.0);
    Metrics {
        pres,
        dres,
        gap,
        pcost,
        dcost,
        rx,
        ry,
        rz,
        rt,
    }
}

fn finish(status: SolveStatus, it: &Iterate, m: &Metrics, iterations: usize) -> RawSolution {
    let inv = 1.0 / it.tau;
    RawSolution {
        status,
        x: scaled(inv, &it.x),
        y: scaled(inv, &it.y),
        z: scaled(inv, &it.z),
        s: scaled(inv, &it.s),
        primal_objective: m.pcost,
        dual_objective: m.dcost,
        primal_residual: m.pres,
        dual_residual: m.dres,
        gap: m.gap,
        iterations,
    }
}

fn failure(d: &Data, iterations: usize) -> RawSolution {
    RawSolution {
        status: SolveStatus::NumericalFailure,
        x: vec![0.0; d.n],
        y: vec![0.0; d.p],
        z: vec![0.0; d.h.len()],
        s: vec![0.0; d.h.len()],
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
        iterations,
    }
}

fn initial_point(d: &Data) -> Option<Iterate> {
    let ident = Scaling::identity(&d.blocks, d.h.len());
    let kkt = KktFactor::new(d, &ident)?;
    let e = cones::identity(&d.blocks, d.h.len());

    // Primal: least-squares fit of G x ≈ h subject to A x = b.
    let (x, _, zp) = kkt.solve(&vec![0.0; d.n], &d.b, &d.h);
    let mut s = neg(&zp);
    // Dual: minimum-norm z with Aᵀy + Gᵀz + c = 0.
    let (_, y, mut z) = kkt.solve(&neg(&d.c), &vec![0.0; d.p], &vec![0.0; d.h.len()]);

    if !d.blocks.is_empty() {
        let ts = cones::interior_shift(&d.blocks, &s);
        if ts >= 0.0 {
            axpy(1.0 + ts, &e, &mut s);
        }
        let tz = cones::interior_shift(&d.blocks, &z);
        if tz >= 0.0 {
            axpy(1.0 + tz, &e, &mut z);
        }
    }
    Some(Iterate {
        x,
        y,
        z,
        s,
        tau: 1.0,
        kappa: 1.0,
    })
}

pub(super) fn run(d: &Data, tol: f64, max_iter: usize) -> RawSolution {
    let cn = norm(&d.c).max(1.0);
    let bn = norm(&d.b).max(1.0);
    let hn = norm(&d.h).max(1.0);
    let nu = cones::degree(&d.blocks) as f64;
    let e = cones::identity(&d.blocks, d.h.len());

    let Some(mut it) = initial_point(d) else {
        return failure(d, 0);
    };
    let Some(mut w) = Scaling::compute(&d.blocks, &it.s, &it.z) else {
        return failure(d, 0);
    };
    let mut best: Option<(f64, RawSolution)> = None;

    for iter in 0..=max_iter {
        let m = metrics(d, &it, (cn, bn, hn));
        log::trace!(
            "iter {iter:3}: pcost {:.9e} dcost {:.9e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
            m.pcost,
            m.dcost,
            m.pres,
            m.dres,
            m.gap,
            it.tau,
            it.kappa
        );
        if m.pres <= tol && m.dres <= tol && m.gap <= tol {
            return finish(SolveStatus::Optimal, &it, &m, iter);
        }
        if m.worst().is_finite() && best.as_ref().is_none_or(|(w, _)| m.worst() < *w) {
            best = Some((m.worst(), finish(SolveStatus::NumericalFailure, &it, &m, iter)));
        }

        // Infeasibility certificates.
        let by_hz = dot(&d.b, &it.y) + dot(&d.h, &it.z);
        if by_hz < 0.0 {
            let mut aty = d.a.tmul_vec(&it.y);
            d.g.tmul_add(&it.z, &mut aty);
            if norm(&aty) / cn / -by_hz <= tol {
                let t = -by_hz;
                let mut cert = finish(SolveStatus::Infeasible, &it, &m, iter);
                cert.y = scaled(1.0 / t, &it.y);
                cert.z = scaled(1.0 / t, &it.z);
                return cert;
            }
        }
        let cx = dot(&d.c, &it.x);
        if cx < 0.0 {
            let ax = d.a.mul_vec(&it.x);
            let mut gxs = d.g.mul_vec(&it.x);
            axpy(1.0, &it.s, &mut gxs);
            if (norm(&ax) / bn).max(norm(&gxs) / hn) / -cx <= tol {
                let t = -cx;
                let mut cert = finish(SolveStatus::Unbounded, &it, &m, iter);
                cert.x = scaled(1.0 / t, &it.x);
                cert.s = scaled(1.0 / t, &it.s);
                return cert;
            }
        }
        if iter == max_iter {
            break;
        }

        let Some(kkt) = KktFactor::new(d, &w) else {
            log::debug!("KKT factorization failed at iteration {iter}");
            break;
        };
        let lam = w.lambda().to_vec();
        let lam_sq = jordan(&d.blocks, &lam, &lam);
        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (nu + 1.0);

        let (x1, y1, z1) = kkt.solve(&neg(&d.c), &d.b, &d.h);
        // Equals κ/τ − cᵀx₁ − bᵀy₁ − hᵀz₁ by the first KKT solve, without
        // the cancellation.
        let wz1 = w.apply(ScalingOp::W, &z1);
        let denom = it.kappa / it.tau + dot(&wz1, &wz1);

        let mut sigma = 0.0;
        let mut aff: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None;
        let mut next_scaled: Option<[Vec<f64>; 4]> = None;
        for phase in 0..2 {
            let rho = 1.0 - sigma;
            let mut rc = neg(&lam_sq);
            axpy(sigma * mu, &e, &mut rc);
            let mut rk = -it.tau * it.kappa + sigma * mu;
            if let Some((ds_a, dz_a, dt_a, dk_a)) = &aff {
                let corr = jordan(&d.blocks, ds_a, dz_a);
                axpy(-1.0, &corr, &mut rc);
                rk -= dt_a * dk_a;
            }
            let tc = w.lambda_solve(&rc);
            let wt_tc = w.apply(ScalingOp::WT, &tc);
            let rhs1 = scaled(-rho, &m.rx);
            let rhs2 = scaled(rho, &m.ry);
            let rhs3: Vec<f64> = m.rz.iter().zip(&wt_tc).map(|(r, t)| rho * r - t).collect();
            let (x2, y2, z2) = kkt.solve(&rhs1, &rhs2, &rhs3);

            let dtau = (-rho * m.rt + rk / it.tau + dot(&d.c, &x2) + dot(&d.b, &y2) + dot(&d.h, &z2)) / denom;
            let mut dx = x2;
            axpy(dtau, &x1, &mut dx);
            let mut dy = y2;
            axpy(dtau, &y1, &mut dy);
            let mut dz = z2;
            axpy(dtau, &z1, &mut dz);
            let dz_s = w.apply(ScalingOp::W, &dz);
            // Δs from the linearized primal residual rather than from
            // t_c − W Δz, so that r_z contracts by exactly (1 − αρ).
            let gdx = d.g.mul_vec(&dx);
            let ds: Vec<f64> = (0..d.h.len()).map(|i| rho * m.rz[i] + d.h[i] * dtau - gdx[i]).collect();
            let ds_s = w.apply(ScalingOp::WInvT, &ds);
            let dkappa = (rk - it.kappa * dtau) / it.tau;

            let mut amax = w.max_step(&ds_s).min(w.max_step(&dz_s));
            if dtau < 0.0 {
                amax = amax.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                amax = amax.min(-it.kappa / dkappa);
            }

            if phase == 0 {
                let alpha = amax.min(1.0);
                sigma = (1.0 - alpha).powi(EXPON);
                aff = Some((ds_s, dz_s, dtau, dkappa));
            } else {
                let alpha = STEP * amax.min(1.0);
                log::trace!("step {alpha:.3e} sigma {sigma:.3e} dtau {dtau:.2e}");
                if !(alpha > 1e-12) {
                    break;
                }
                axpy(alpha, &dx, &mut it.x);
                axpy(alpha, &dy, &mut it.y);
                it.tau += alpha * dtau;
                it.kappa += alpha * dkappa;
                let mut s_s = lam.clone();
                axpy(alpha, &ds_s, &mut s_s);
                let mut z_s = lam.clone();
                axpy(alpha, &dz_s, &mut z_s);
                let mut s_raw = it.s.clone();
                axpy(alpha, &ds, &mut s_raw);
                let mut z_raw = it.z.clone();
                axpy(alpha, &dz, &mut z_raw);
                next_scaled = Some([s_s, z_s, s_raw, z_raw]);
            }
        }
        drop(kkt);
        let Some([s_s, z_s, s_raw, z_raw]) = next_scaled else {
            log::debug!("step length collapsed at iteration {iter}");
            break;
        };
        let Some(nw) = w.update(&s_s, &z_s, &s_raw, &z_raw) else {
            log::debug!("iterate left the cone interior at iteration {iter}");
            break;
        };
        w = nw;
        it.s = s_raw;
        it.z = z_raw;
    }
    match best {
        Some((_, sol)) => sol,
        None => failure(d, max_iter),
    }
}
