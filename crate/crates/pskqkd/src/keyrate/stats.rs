//! Postselection bookkeeping: symbol statistics, p_pass and δ_EC.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::numerics::{generalized_laguerre, ln_factorial, HermitianMatrix};
use crate::operators::RegionOperatorSet;
use crate::protocol::{coherent_fock_vector, Constellation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionStats {
    pub p_pass: f64,
    pub delta_ec: f64,
    /// P(z = k | x = l), indexed [l][k]; the discard outcome is not included.
    pub cond_probs: Vec<Vec<f64>>,
    pub h_z: f64,
    pub h_z_given_x: f64,
}

/// D(β) ρ_th(n̄) D(β)† on |0⟩..|nc⟩.
pub fn displaced_thermal(beta: c64, nbar: f64, nc: usize) -> Result<HermitianMatrix> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("thermal occupation {nbar}")));
    }
    if nbar == 0.0 {
        return Ok(HermitianMatrix::projector(&coherent_fock_vector(beta, nc)));
    }
    let b2 = beta.norm_sqr();
    let x = -b2 / (nbar * (1.0 + nbar));
    let pref = (-b2 / (1.0 + nbar)).exp();
    let mut m = Mat::<c64>::zeros(nc + 1, nc + 1);
    for hi in 0..=nc {
        for lo in 0..=hi {
            let k = hi - lo;
            // n̄^lo / (1+n̄)^{hi+1} √(lo!/hi!) β^k L_lo^{(k)}(x)
            let ln_mag = lo as f64 * nbar.ln() - (hi + 1) as f64 * (1.0 + nbar).ln()
                + 0.5 * (ln_factorial(lo as u64) - ln_factorial(hi as u64));
            let v = pref * ln_mag.exp() * generalized_laguerre(lo, k as f64, x);
            let e = beta.powu(k as u32) * v;
            m[(hi, lo)] = e;
            m[(lo, hi)] = e.conj();
        }
    }
    Ok(HermitianMatrix::hermitian_part(m.as_ref()))
}

/// Block-diagonal Σ_l p_l |l⟩⟨l| ⊗ ρ_B^l of the honest thermal-loss channel,
/// each ρ_B^l renormalized after truncation.
pub fn honest_state(c: &Constellation, ch: &ChannelParams, nc: usize) -> Result<HermitianMatrix> {
    ch.validate()?;
    let eta = ch.eta();
    let nbar = eta * ch.excess_noise / 2.0;
    let db = nc + 1;
    let n = c.n_states * db;
    let mut m = Mat::<c64>::zeros(n, n);
    for (l, a) in c.states().into_iter().enumerate() {
        let r = displaced_thermal(a * eta.sqrt(), nbar, nc)?;
        let w = c.probabilities[l] / r.trace();
        m.as_mut()
            .submatrix_mut(l * db, l * db, db, db)
            .copy_from(r.as_mat() * w);
    }
    Ok(HermitianMatrix::hermitian_part(m.as_ref()))
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

pub fn postselection_stats(
    rho: &HermitianMatrix,
    region_set: &RegionOperatorSet,
    c: &Constellation,
    beta: f64,
) -> Result<PostselectionStats> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("reconciliation efficiency {beta}")));
    }
    let db = region_set.dim();
    let expected = c.n_states * db;
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: rho.dim(),
        });
    }
    let mut cond = Vec::with_capacity(c.n_states);
    for l in 0..c.n_states {
        let blk = rho.as_ref().submatrix(l * db, l * db, db, db);
        let rb = HermitianMatrix::hermitian_part((blk * (1.0 / c.probabilities[l])).as_ref());
        let row: Vec<f64> = region_set.ops.iter().map(|r| rb.inner(r).max(0.0)).collect();
        cond.push(row);
    }
    let p_pass: f64 = cond
        .iter()
        .zip(&c.probabilities)
        .map(|(row, p)| p * row.iter().sum::<f64>())
        .sum();
    if !(p_pass > 0.0) {
        return Err(Error::Domain("no signal passes the postselection".into()));
    }
    let nk = region_set.n_symbols();
    let mut pz = vec![0.0; nk];
    let mut h_joint = 0.0;
    for (row, p) in cond.iter().zip(&c.probabilities) {
        for (k, v) in row.iter().enumerate() {
            let j = p * v / p_pass;
            pz[k] += j;
            if j > 0.0 {
                h_joint -= j * j.log2();
            }
        }
    }
    let h_z = entropy(&pz);
    let px: Vec<f64> = cond
        .iter()
        .zip(&c.probabilities)
        .map(|(row, p)| p * row.iter().sum::<f64>() / p_pass)
        .collect();
    let h_z_given_x = (h_joint - entropy(&px)).max(0.0);
    Ok(PostselectionStats {
        p_pass,
        delta_ec: (1.0 - beta) * h_z + beta * h_z_given_x,
        cond_probs: cond,
        h_z,
        h_z_given_x,
    })
}
