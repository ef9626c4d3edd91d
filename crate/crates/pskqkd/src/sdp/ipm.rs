//! Primal-dual path-following interior-point method (HKM direction with
//! Mehrotra predictor-corrector) on one Hermitian PSD block plus a
//! nonnegative orthant:
//!
//!   min ⟨C, X⟩ + c·x   s.t.  ⟨A_i, X⟩ + a_i·x = b_i,  X ⪰ 0,  x ≥ 0
//!
//! with dual  max b·y  s.t.  C − Σ y_i A_i = Z ⪰ 0,  c − Σ y_i a_i = z ≥ 0.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use super::block::BlockOperator;
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpmOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap: 1e-7,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
    NumericalFailure,
}

impl SdpStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIter => "max_iter",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Cone problem data. `a_lin[i]` lists (k, a_ik) for the orthant part.
pub(crate) struct ConeProblem<'a> {
    pub c: MatRef<'a, c64>,
    pub c_lin: Vec<f64>,
    pub a: &'a [BlockOperator],
    pub a_lin: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConeSolution {
    pub x: Mat<c64>,
    pub y: Vec<f64>,
    pub z: Mat<c64>,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub gap: f64,
}

fn hinner(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let x = a[(i, j)];
            let y = b[(i, j)];
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

fn herm(m: MatRef<'_, c64>) -> Mat<c64> {
    HermitianMatrix::hermitian_part(m).into_mat()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest step t with X + t·dX ⪰ 0, given the Cholesky factor of X.
fn max_step_psd(l: MatRef<'_, c64>, dx: MatRef<'_, c64>) -> Result<f64> {
    let mut t = dx.to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, t.as_mut(), Par::Seq);
    let mut t2 = t.adjoint().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, t2.as_mut(), Par::Seq);
    let h = herm(t2.as_ref());
    let eig = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("step-length eigenvalues: {e:?}")))?;
    let lmin = eig.first().copied().unwrap_or(0.0);
    Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn max_step_lin(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: Mat<c64>,
    dz: Mat<c64>,
    dy: Vec<f64>,
    dxl: Vec<f64>,
    dzl: Vec<f64>,
}

pub(crate) fn solve_cone(p: &ConeProblem<'_>, opts: &IpmOptions) -> Result<ConeSolution> {
    let n = p.c.nrows();
    let m = p.a.len();
    let nl = p.c_lin.len();
    if p.b.len() != m || p.a_lin.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: p.b.len(),
        });
    }
    for a in p.a {
        if a.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.dim(),
            });
        }
    }
    let dense_a: Vec<f64> = p.a.iter().map(|a| a.to_dense().frobenius_norm()).collect();
    let norm_c = p.c.norm_l2();
    let norm_b = norm2(&p.b);
    let norm_cl = norm2(&p.c_lin);
    let max_a = dense_a.iter().cloned().fold(0.0, f64::max);

    let xi = p
        .b
        .iter()
        .zip(&dense_a)
        .map(|(b, a)| (1.0 + b.abs()) / (1.0 + a))
        .fold(1.0, f64::max);
    let zeta = ((norm_c + max_a) / (n as f64).sqrt()).max(1.0);
    let mut x = Mat::<c64>::identity(n, n) * xi;
    let mut z = Mat::<c64>::identity(n, n) * zeta;
    let mut xl = vec![xi; nl];
    let mut zl = vec![zeta.max(1.0 + norm_cl); nl];
    let mut y = vec![0.0; m];
    let nu = (n + nl) as f64;

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut relp = f64::INFINITY;
    let mut reld = f64::INFINITY;
    let mut relgap = f64::INFINITY;
    let mut pobj = 0.0;
    let mut dobj = 0.0;

    for it in 0..=opts.max_iter {
        iterations = it;
        // residuals
        let mut sy = Mat::<c64>::zeros(n, n);
        for (a, &yi) in p.a.iter().zip(&y) {
            a.accumulate(yi, &mut sy);
        }
        let rd = herm((p.c.to_owned() - &sy - &z).as_ref());
        let mut rdl = p.c_lin.clone();
        for (i, row) in p.a_lin.iter().enumerate() {
            for &(k, v) in row {
                rdl[k] -= y[i] * v;
            }
        }
        for k in 0..nl {
            rdl[k] -= zl[k];
        }
        let mut rp = p.b.clone();
        for i in 0..m {
            rp[i] -= p.a[i].pair(x.as_ref());
            for &(k, v) in &p.a_lin[i] {
                rp[i] -= v * xl[k];
            }
        }
        let comp = hinner(x.as_ref(), z.as_ref()) + xl.iter().zip(&zl).map(|(a, b)| a * b).sum::<f64>();
        let mu = comp / nu;
        pobj = hinner(p.c, x.as_ref()) + p.c_lin.iter().zip(&xl).map(|(a, b)| a * b).sum::<f64>();
        dobj = p.b.iter().zip(&y).map(|(a, b)| a * b).sum();
        relp = norm2(&rp) / (1.0 + norm_b);
        reld = (rd.norm_l2() + norm2(&rdl)) / (1.0 + norm_c + norm_cl);
        relgap = comp.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
        if relp <= opts.tol_feas && reld <= opts.tol_feas && relgap <= opts.tol_gap {
            status = SdpStatus::Optimal;
            break;
        }
        let ynorm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if ynorm > 1e12 || x.norm_l2() > 1e12 {
            status = SdpStatus::Infeasible;
            break;
        }
        if it == opts.max_iter {
            break;
        }

        let zchol = match z.llt(Side::Lower) {
            Ok(c) => c,
            Err(_) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        let zinv = herm(zchol.inverse().as_ref());
        let xchol = match x.llt(Side::Lower) {
            Ok(c) => c,
            Err(_) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };

        // Schur complement
        let mut schur = Mat::<f64>::zeros(m, m);
        for j in 0..m {
            let w = p.a[j].sandwich(zinv.as_ref(), x.as_ref());
            for i in 0..m {
                schur[(i, j)] = p.a[i].pair(w.as_ref());
            }
        }
        let ratio: Vec<f64> = xl.iter().zip(&zl).map(|(a, b)| a / b).collect();
        for i in 0..m {
            for &(k, vi) in &p.a_lin[i] {
                for j in 0..m {
                    for &(k2, vj) in &p.a_lin[j] {
                        if k == k2 {
                            schur[(i, j)] += vi * vj * ratio[k];
                        }
                    }
                }
            }
        }
        let schur = Mat::from_fn(m, m, |i, j| 0.5 * (schur[(i, j)] + schur[(j, i)]));
        let mut diag_max: f64 = 0.0;
        for i in 0..m {
            diag_max = diag_max.max(schur[(i, i)].abs());
        }
        let mut shift = 0.0;
        let schur_chol = loop {
            let s = Mat::from_fn(m, m, |i, j| schur[(i, j)] + if i == j { shift } else { 0.0 });
            match s.llt(Side::Lower) {
                Ok(c) => break Some(c),
                Err(_) => {
                    shift = if shift == 0.0 { 1e-14 * diag_max.max(1e-300) } else { shift * 100.0 };
                    if shift > 1e-6 * diag_max.max(1e-300) {
                        break None;
                    }
                }
            }
        };
        let Some(schur_chol) = schur_chol else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        let zinv_rd_x = &zinv * &rd * &x;
        let solve_dir = |target: f64, corr: Option<(&Mat<c64>, &[f64])>| -> Direction {
            let mut gmat = zinv.clone() * target - &x - &zinv_rd_x;
            let mut g: Vec<f64> = (0..nl).map(|k| -xl[k] + target / zl[k]).collect();
            if let Some((cm, cl)) = corr {
                gmat -= &zinv * cm;
                for k in 0..nl {
                    g[k] -= cl[k] / zl[k];
                }
            }
            let mut rhs = Mat::<f64>::zeros(m, 1);
            for i in 0..m {
                let mut v = rp[i] - p.a[i].pair(gmat.as_ref());
                for &(k, a) in &p.a_lin[i] {
                    v -= a * (g[k] - ratio[k] * rdl[k]);
                }
                rhs[(i, 0)] = v;
            }
            let sol = schur_chol.solve(&rhs);
            let dy: Vec<f64> = (0..m).map(|i| sol[(i, 0)]).collect();
            let mut s = Mat::<c64>::zeros(n, n);
            for (a, &d) in p.a.iter().zip(&dy) {
                a.accumulate(d, &mut s);
            }
            let dz = herm((&rd - &s).as_ref());
            let dx = herm((gmat + &zinv * &s * &x).as_ref());
            let mut dzl = rdl.clone();
            for (i, row) in p.a_lin.iter().enumerate() {
                for &(k, a) in row {
                    dzl[k] -= dy[i] * a;
                }
            }
            let dxl: Vec<f64> = (0..nl).map(|k| g[k] - ratio[k] * dzl[k]).collect();
            Direction { dx, dz, dy, dxl, dzl }
        };

        let steps = |d: &Direction| -> Result<(f64, f64)> {
            let ap = max_step_psd(xchol.L(), d.dx.as_ref())?.min(max_step_lin(&xl, &d.dxl));
            let ad = max_step_psd(zchol.L(), d.dz.as_ref())?.min(max_step_lin(&zl, &d.dzl));
            Ok((ap, ad))
        };

        let pred = solve_dir(0.0, None);
        let (ap, ad) = match steps(&pred) {
            Ok(s) => s,
            Err(_) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let xa = &x + &pred.dx * ap;
        let za = &z + &pred.dz * ad;
        let comp_aff = hinner(xa.as_ref(), za.as_ref())
            + (0..nl)
                .map(|k| (xl[k] + ap * pred.dxl[k]) * (zl[k] + ad * pred.dzl[k]))
                .sum::<f64>();
        let sigma = (comp_aff / comp).max(0.0).powi(3).min(1.0);
        let corr_m = &pred.dz * &pred.dx;
        let corr_l: Vec<f64> = (0..nl).map(|k| pred.dzl[k] * pred.dxl[k]).collect();
        let dir = solve_dir(sigma * mu, Some((&corr_m, &corr_l)));
        let (ap, ad) = match steps(&dir) {
            Ok(s) => s,
            Err(_) => {
                status = SdpStatus::NumericalFailure;
                break;
            }
        };
        let tau = 0.98;
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            status = SdpStatus::NumericalFailure;
            break;
        }
        x = herm((&x + &dir.dx * ap).as_ref());
        z = herm((&z + &dir.dz * ad).as_ref());
        for k in 0..nl {
            xl[k] += ap * dir.dxl[k];
            zl[k] += ad * dir.dzl[k];
        }
        for i in 0..m {
            y[i] += ad * dir.dy[i];
        }
    }

    Ok(ConeSolution {
        x,
        y,
        z,
        status,
        iterations,
        primal_objective: pobj,
        dual_objective: dobj,
        primal_infeasibility: relp,
        dual_infeasibility: reld,
        gap: relgap,
    })
}

/// min ⟨C, X⟩ subject to ⟨A_i, X⟩ = b_i and ρ₀ + X ⪰ 0.
#[derive(Debug, Clone)]
pub struct LinearSdp {
    pub objective: HermitianMatrix,
    pub eq_constraints: Vec<(BlockOperator, f64)>,
    pub psd_offset: HermitianMatrix,
}

impl LinearSdp {
    /// Problem with dense constraint matrices.
    pub fn from_dense(
        objective: HermitianMatrix,
        eq_constraints: Vec<(HermitianMatrix, f64)>,
        psd_offset: HermitianMatrix,
    ) -> Self {
        Self {
            objective,
            eq_constraints: eq_constraints
                .into_iter()
                .map(|(a, b)| (BlockOperator::dense(&a), b))
                .collect(),
            psd_offset,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// X for the linear SDP.
    pub primal: HermitianMatrix,
    /// Equality multipliers y.
    pub dual: Vec<f64>,
    /// Dual slack C − Σ y_i A_i.
    pub dual_slack: HermitianMatrix,
    pub objective_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

pub fn solve_linear_sdp(p: &LinearSdp, opts: &IpmOptions) -> Result<SdpSolution> {
    let n = p.objective.dim();
    if p.psd_offset.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.psd_offset.dim(),
        });
    }
    let ops: Vec<BlockOperator> = p.eq_constraints.iter().map(|(a, _)| a.clone()).collect();
    // shift to Y = ρ₀ + X so that the cone becomes the standard one
    let b: Vec<f64> = p
        .eq_constraints
        .iter()
        .map(|(a, b)| b + a.pair(p.psd_offset.as_ref()))
        .collect();
    let cone = ConeProblem {
        c: p.objective.as_ref(),
        c_lin: vec![],
        a: &ops,
        a_lin: vec![vec![]; ops.len()],
        b,
    };
    let sol = solve_cone(&cone, opts)?;
    let shift = p.objective.inner(&p.psd_offset);
    let primal = &HermitianMatrix::hermitian_part(sol.x.as_ref()) - &p.psd_offset;
    Ok(SdpSolution {
        primal,
        dual: sol.y,
        dual_slack: HermitianMatrix::hermitian_part(sol.z.as_ref()),
        objective_value: sol.primal_objective - shift,
        dual_value: sol.dual_objective - shift,
        gap: sol.gap,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        status: sol.status,
        iterations: sol.iterations,
    })
}
