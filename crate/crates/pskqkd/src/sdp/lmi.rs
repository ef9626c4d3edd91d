//! Dual maximization with one linear matrix inequality and an ℓ₁ penalty:
//!
//!   max γ·y − ε′ Σ z_i   s.t.  Σ y_i Γ_i ⪯ B,  −z ≤ y ≤ z.
//!
//! Solved through its conic dual (min ⟨B, X⟩ over a slab of width 2ε′
//! around the constraint values). Whatever the solver returns, the reported
//! point is made feasible before its value is taken.


use super::block::BlockOperator;
use super::ipm::{solve_cone, ConeProblem, IpmOptions, SdpStatus};
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

#[derive(Debug, Clone)]
pub struct LmiMaxProblem {
    pub cost: Vec<f64>,
    pub lmi_terms: Vec<BlockOperator>,
    pub lmi_bound: HermitianMatrix,
    pub l1_weight: f64,
    /// Coefficients c with Σ c_i Γ_i = I, used to repair small LMI violations.
    pub identity_combination: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// γ·y − ε′‖y‖₁ at the returned (feasible) point.
    pub value: f64,
    /// Smallest eigenvalue of B − Σ y_i Γ_i.
    pub slack_min_eigenvalue: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Amount added along the identity combination to restore feasibility.
    pub restoration_shift: f64,
}

impl LmiMaxProblem {
    /// B − Σ y_i Γ_i
    pub fn slack(&self, y: &[f64]) -> HermitianMatrix {
        let mut s = self.lmi_bound.as_mat().clone();
        for (a, &v) in self.lmi_terms.iter().zip(y) {
            a.accumulate(-v, &mut s);
        }
        HermitianMatrix::hermitian_part(s.as_ref())
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.cost.iter().zip(y).map(|(c, v)| c * v).sum::<f64>()
            - self.l1_weight * y.iter().map(|v| v.abs()).sum::<f64>()
    }
}

fn negated(a: &BlockOperator) -> BlockOperator {
    let mut out = a.clone();
    for t in &mut out.terms {
        t.coeff = -t.coeff;
    }
    out
}

/// Make y feasible: shift along the identity combination, else shrink toward 0.
fn restore(p: &LmiMaxProblem, mut y: Vec<f64>) -> Result<(Vec<f64>, f64, f64)> {
    let scale = p.lmi_bound.frobenius_norm().max(1.0);
    let mut lmin = p.slack(&y).min_eigenvalue()?;
    if lmin >= 0.0 {
        return Ok((y, lmin, 0.0));
    }
    if let Some(c) = &p.identity_combination {
        let mut total = 0.0;
        let mut margin = 1e-13 * scale;
        for _ in 0..8 {
            let t = -lmin + margin;
            for (yi, ci) in y.iter_mut().zip(c) {
                *yi -= t * ci;
            }
            total += t;
            lmin = p.slack(&y).min_eigenvalue()?;
            if lmin >= 0.0 {
                return Ok((y, lmin, total));
            }
            margin *= 10.0;
        }
        return Err(Error::Numerical("identity shift failed to restore the LMI".into()));
    }
    // bisection on y ← θ y
    let at_zero = p.lmi_bound.min_eigenvalue()?;
    if at_zero < 0.0 {
        return Err(Error::Infeasible("LMI infeasible at y = 0 and no identity combination".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let ym: Vec<f64> = y.iter().map(|v| v * mid).collect();
        if p.slack(&ym).min_eigenvalue()? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    y.iter_mut().for_each(|v| *v *= lo);
    let lmin = p.slack(&y).min_eigenvalue()?;
    Ok((y, lmin, 0.0))
}

pub fn solve_lmi_max(p: &LmiMaxProblem, opts: &IpmOptions) -> Result<LmiSolution> {
    let m = p.cost.len();
    if p.lmi_terms.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: p.lmi_terms.len(),
        });
    }
    if let Some(c) = &p.identity_combination {
        if c.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.len(),
            });
        }
    }
    let eps = p.l1_weight.max(0.0);
    let mut ops = Vec::with_capacity(2 * m);
    let mut b = Vec::with_capacity(2 * m);
    let mut a_lin = Vec::with_capacity(2 * m);
    for (i, a) in p.lmi_terms.iter().enumerate() {
        ops.push(a.clone());
        b.push(p.cost[i] + eps);
        a_lin.push(vec![(i, 1.0)]);
    }
    for (i, a) in p.lmi_terms.iter().enumerate() {
        ops.push(negated(a));
        b.push(-p.cost[i] + eps);
        a_lin.push(vec![(m + i, 1.0)]);
    }
    let cone = ConeProblem {
        c: p.lmi_bound.as_ref(),
        c_lin: vec![0.0; 2 * m],
        a: &ops,
        a_lin,
        b,
    };
    let sol = solve_cone(&cone, opts)?;
    let y_raw: Vec<f64> = (0..m).map(|i| sol.y[i] - sol.y[m + i]).collect();
    let y_raw = if y_raw.iter().all(|v| v.is_finite()) {
        y_raw
    } else {
        vec![0.0; m]
    };
    let (y, lmin, shift) = match restore(p, y_raw) {
        Ok(r) => r,
        Err(Error::Infeasible(msg)) => return Err(Error::Infeasible(msg)),
        Err(e) => return Err(e),
    };
    let z: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    Ok(LmiSolution {
        value: p.value(&y),
        y,
        z,
        slack_min_eigenvalue: lmin,
        status: sol.status,
        iterations: sol.iterations,
        restoration_shift: shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_lmi() {
        let p = LmiMaxProblem {
            cost: vec![1.0],
            lmi_terms: vec![BlockOperator::dense(&HermitianMatrix::identity(1))],
            lmi_bound: HermitianMatrix::identity(1),
            l1_weight: 0.0,
            identity_combination: Some(vec![1.0]),
        };
        let s = solve_lmi_max(&p, &IpmOptions::default()).unwrap();
        assert!((s.y[0] - 1.0).abs() < 1e-6, "y = {:?}", s.y);
        assert!((s.value - 1.0).abs() < 1e-6);
        assert!(s.slack_min_eigenvalue >= 0.0);
    }

    #[test]
    fn zero_cost_gives_zero() {
        let p = LmiMaxProblem {
            cost: vec![0.0],
            lmi_terms: vec![BlockOperator::dense(&HermitianMatrix::diagonal(&[1.0, -1.0]))],
            lmi_bound: HermitianMatrix::identity(2),
            l1_weight: 0.1,
            identity_combination: None,
        };
        let s = solve_lmi_max(&p, &IpmOptions::default()).unwrap();
        assert!(s.value.abs() < 1e-7);
        assert!(s.slack_min_eigenvalue >= 0.0);
    }
}
