//! Step 1 (Frank-Wolfe upper bound) and step 2 (dual lower bound).

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::maps::PostprocessingMaps;
use super::objective::{evaluate, ObjectiveEval};
use crate::channel::ConstraintSet;
use crate::error::{Error, Result};
use crate::numerics::{psd_project, HermitianMatrix};
use crate::sdp::{solve_linear_sdp, solve_lmi_max, IpmOptions, LinearSdp, LmiMaxProblem, SdpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FwConfig {
    pub max_iters: usize,
    pub eps_fw: f64,
    pub eps_tilde: f64,
    pub line_search_tol: f64,
    pub ipm: IpmOptions,
}

impl Default for FwConfig {
    fn default() -> Self {
        Self {
            max_iters: 150,
            eps_fw: 1e-7,
            eps_tilde: 1e-11,
            line_search_tol: 1e-10,
            ipm: IpmOptions::default(),
        }
    }
}

impl FwConfig {
    /// Defaults with the iteration budget used for a constellation of `n_states`.
    pub fn for_states(n_states: usize) -> Self {
        Self {
            max_iters: if n_states >= 8 { 200 } else { 150 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.eps_fw > 0.0
            && self.eps_tilde > 0.0
            && self.eps_tilde < 1.0
            && self.line_search_tol > 0.0
            && self.ipm.tol_feas > 0.0
            && self.ipm.tol_gap > 0.0
            && self.ipm.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid solver configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FwStop {
    Converged,
    MaxIter,
    /// The line search could not decrease the objective any further.
    Stalled,
    SubproblemFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwIterate {
    pub value: f64,
    /// −Tr[Δρ ∇f] of the direction found at this iterate.
    pub gap: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct FwOutcome {
    pub rho: HermitianMatrix,
    pub upper: f64,
    pub trace: Vec<FwIterate>,
    pub stop: FwStop,
}

impl FwOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Move ρ onto the affine constraint space by a least-squares correction
/// Σ c_i Γ_i. The correction is kept only while ρ stays PSD.
fn polish(rho: &HermitianMatrix, cs: &ConstraintSet) -> Result<HermitianMatrix> {
    let m = cs.len();
    let r: Vec<f64> = cs
        .evaluate(rho)
        .iter()
        .zip(&cs.values)
        .map(|(a, b)| b - a)
        .collect();
    let dense: Vec<HermitianMatrix> = (0..m).map(|i| cs.dense_operator(i)).collect();
    let gram = Mat::<f64>::from_fn(m, m, |i, j| dense[i].inner(&dense[j]));
    let rhs = Mat::<f64>::from_fn(m, 1, |i, _| r[i]);
    let c = match gram.llt(Side::Lower) {
        Ok(l) => l.solve(&rhs),
        Err(_) => return Ok(rho.clone()),
    };
    let mut out = rho.as_mat().clone();
    for (i, d) in dense.iter().enumerate() {
        out += d.as_mat() * c[(i, 0)];
    }
    let cand = HermitianMatrix::hermitian_part(out.as_ref());
    if cand.min_eigenvalue()? < -1e-10 {
        return Ok(rho.clone());
    }
    let (proj, _) = psd_project(&cand)?;
    if cs.max_violation(&proj) < cs.max_violation(rho) {
        Ok(proj)
    } else {
        Ok(rho.clone())
    }
}

/// Clip tiny negative eigenvalues left by solver noise.
fn repair(rho: HermitianMatrix) -> Result<HermitianMatrix> {
    if rho.min_eigenvalue()? < -1e-10 {
        Ok(psd_project(&rho)?.0)
    } else {
        Ok(rho)
    }
}

/// A feasible starting point: the solver's answer for a constant objective.
pub fn initial_point(cs: &ConstraintSet, ipm: &IpmOptions) -> Result<HermitianMatrix> {
    let n = cs.dim();
    let sdp = LinearSdp {
        objective: HermitianMatrix::zeros(n),
        eq_constraints: cs.operators.iter().cloned().zip(cs.values.iter().copied()).collect(),
        psd_offset: HermitianMatrix::zeros(n),
    };
    let sol = solve_linear_sdp(&sdp, ipm)?;
    match sol.status {
        SdpStatus::Infeasible => return Err(Error::Infeasible("constraint set has no PSD solution".into())),
        SdpStatus::NumericalFailure if sol.primal_infeasibility > 1e-6 => {
            return Err(Error::Numerical("initial point search failed".into()))
        }
        _ => {}
    }
    let rho = repair(sol.primal)?;
    let rho = if cs.max_violation(&rho) > 0.1 * ipm.tol_feas {
        polish(&rho, cs)?
    } else {
        rho
    };
    if cs.max_violation(&rho) > 1e-6 {
        return Err(Error::Infeasible(format!(
            "initial point violates the constraints by {:.3e}",
            cs.max_violation(&rho)
        )));
    }
    Ok(rho)
}

fn directional(eval: &ObjectiveEval, delta: &HermitianMatrix) -> f64 {
    eval.gradient.inner(delta)
}

pub fn frank_wolfe(
    cs: &ConstraintSet,
    maps: &PostprocessingMaps,
    rho0: HermitianMatrix,
    cfg: &FwConfig,
) -> Result<FwOutcome> {
    cfg.validate()?;
    let eps = cfg.eps_tilde;
    let mut rho = rho0;
    let mut eval = evaluate(&rho, maps, eps)?;
    let mut trace = Vec::new();
    let homogeneous: Vec<_> = cs.operators.iter().cloned().map(|a| (a, 0.0)).collect();
    let mut stop = FwStop::MaxIter;
    for _ in 0..cfg.max_iters {
        let sdp = LinearSdp {
            objective: eval.gradient.clone(),
            eq_constraints: homogeneous.clone(),
            psd_offset: rho.clone(),
        };
        let sol = match solve_linear_sdp(&sdp, &cfg.ipm) {
            Ok(s) if s.status != SdpStatus::Infeasible => s,
            _ => {
                stop = FwStop::SubproblemFailed;
                break;
            }
        };
        let delta = sol.primal;
        let gap = -directional(&eval, &delta);
        if gap < cfg.eps_fw {
            trace.push(FwIterate {
                value: eval.value,
                gap,
                step: 0.0,
            });
            stop = FwStop::Converged;
            break;
        }
        // bisection on the sign of d/dt f(ρ + tΔ)
        let at = |t: f64| -> Result<ObjectiveEval> { evaluate(&rho.axpy(t, &delta), maps, eps) };
        let full = at(1.0)?;
        let (mut t, mut next) = if directional(&full, &delta) <= 0.0 {
            (1.0, full)
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            while hi - lo > cfg.line_search_tol {
                let mid = 0.5 * (lo + hi);
                if directional(&at(mid)?, &delta) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo, at(lo)?)
        };
        let mut tries = 0;
        while !(next.value < eval.value) && tries < 20 {
            t *= 0.5;
            next = at(t)?;
            tries += 1;
        }
        if !(next.value < eval.value) {
            trace.push(FwIterate {
                value: eval.value,
                gap,
                step: 0.0,
            });
            stop = FwStop::Stalled;
            break;
        }
        trace.push(FwIterate {
            value: next.value,
            gap,
            step: t,
        });
        let mut cand = repair(rho.axpy(t, &delta))?;
        if cs.max_violation(&cand) > 0.1 * cfg.ipm.tol_feas {
            cand = polish(&cand, cs)?;
        }
        let cand_eval = evaluate(&cand, maps, eps)?;
        if cand_eval.value <= eval.value {
            rho = cand;
            eval = cand_eval;
        } else {
            // keep the unpolished step so the logged sequence stays monotone
            rho = rho.axpy(t, &delta);
            eval = next;
        }
        if let Some(last) = trace.last_mut() {
            last.value = eval.value;
        }
    }
    Ok(FwOutcome {
        upper: eval.value,
        rho,
        trace,
        stop,
    })
}

#[derive(Debug, Clone)]
pub struct Step2Outcome {
    pub lower: f64,
    pub eps_prime: f64,
    pub zeta: f64,
    /// f_ε(ρ) − Tr[ρ ∇f_ε(ρ)]
    pub linearization: f64,
    /// γ·y − ε′‖y‖₁ at the returned dual point.
    pub dual_value: f64,
    pub dual_y: Vec<f64>,
    pub slack_min_eigenvalue: f64,
    pub status: SdpStatus,
}

/// ζ_ε = 2ε(d′−1) log₂(d′ / (ε(d′−1)))
pub fn zeta_eps(eps: f64, d_out: usize) -> f64 {
    let dm = d_out as f64 - 1.0;
    2.0 * eps * dm * (d_out as f64 / (eps * dm)).log2()
}

pub fn step2_lower_bound(
    rho: &HermitianMatrix,
    cs: &ConstraintSet,
    maps: &PostprocessingMaps,
    cfg: &FwConfig,
) -> Result<Step2Outcome> {
    cfg.validate()?;
    let eps = cfg.eps_tilde;
    let eps_prime = cs.max_violation(rho).max(cfg.ipm.tol_feas);
    let zeta = zeta_eps(eps, maps.output_dim());
    let eval = evaluate(rho, maps, eps)?;
    let linearization = eval.value - rho.inner(&eval.gradient);
    let lmi = LmiMaxProblem {
        cost: cs.values.clone(),
        lmi_terms: cs.operators.clone(),
        lmi_bound: eval.gradient,
        l1_weight: eps_prime,
        identity_combination: Some(cs.identity_combination()),
    };
    match solve_lmi_max(&lmi, &cfg.ipm) {
        Ok(sol) => Ok(Step2Outcome {
            lower: linearization + sol.value - zeta,
            eps_prime,
            zeta,
            linearization,
            dual_value: sol.value,
            dual_y: sol.y,
            slack_min_eigenvalue: sol.slack_min_eigenvalue,
            status: sol.status,
        }),
        Err(Error::Infeasible(_)) | Err(Error::Numerical(_)) => Ok(Step2Outcome {
            lower: f64::NEG_INFINITY,
            eps_prime,
            zeta,
            linearization,
            dual_value: f64::NEG_INFINITY,
            dual_y: vec![0.0; cs.len()],
            slack_min_eigenvalue: f64::NAN,
            status: SdpStatus::Infeasible,
        }),
        Err(e) => Err(e),
    }
}
