//! Phase-invariant Gaussian channel and the constraint set of the key-rate SDP.

use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::operators::{build_observables, trusted_observables, TrustedDetectorParams};
use crate::protocol::{alice_gram, Constellation};
use crate::sdp::{BlockOperator, BlockTerm};

pub const DEFAULT_LOSS_EXPONENT: f64 = 0.02;

/// Fiber of length L with transmittance 10^{-loss_exponent·L} and excess
/// noise ξ in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub distance_km: f64,
    pub loss_exponent: f64,
    pub excess_noise: f64,
}

impl ChannelParams {
    pub fn new(distance_km: f64, excess_noise: f64) -> Result<Self> {
        let ch = Self {
            distance_km,
            loss_exponent: DEFAULT_LOSS_EXPONENT,
            excess_noise,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km >= 0.0) || !self.distance_km.is_finite() {
            return Err(Error::InvalidParameter(format!("distance {} km", self.distance_km)));
        }
        if !(self.loss_exponent >= 0.0) || !self.loss_exponent.is_finite() {
            return Err(Error::InvalidParameter(format!("loss exponent {}", self.loss_exponent)));
        }
        if !(self.excess_noise >= 0.0) || !self.excess_noise.is_finite() {
            return Err(Error::InvalidParameter(format!("excess noise {}", self.excess_noise)));
        }
        if !(self.eta() > 0.0) {
            return Err(Error::InvalidParameter("transmittance underflows to zero".into()));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        10f64.powf(-(self.loss_exponent * self.distance_km))
    }
}

/// Which detector model Bob's measurement follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetectorModel {
    Untrusted,
    Trusted(TrustedDetectorParams),
}

impl DetectorModel {
    pub fn trusted(&self) -> Option<&TrustedDetectorParams> {
        match self {
            DetectorModel::Untrusted => None,
            DetectorModel::Trusted(d) => Some(d),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DetectorModel::Untrusted => "untrusted",
            DetectorModel::Trusted(_) => "trusted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UntrustedMoments {
    pub q: f64,
    pub p: f64,
    pub n: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedMoments {
    pub f_q: f64,
    pub f_p: f64,
    pub s_q: f64,
    pub s_p: f64,
}

/// ⟨q⟩, ⟨p⟩, ⟨n⟩, ⟨d⟩ at Bob's side given Alice sent |α_x⟩.
pub fn expected_moments_untrusted(alpha: c64, ch: &ChannelParams) -> UntrustedMoments {
    let eta = ch.eta();
    let s = (2.0 * eta).sqrt();
    UntrustedMoments {
        q: s * alpha.re,
        p: s * alpha.im,
        n: eta * alpha.norm_sqr() + eta * ch.excess_noise / 2.0,
        d: eta * (alpha * alpha + alpha.conj() * alpha.conj()).re,
    }
}

/// Trusted-detector first and second moments.
pub fn expected_moments_trusted(
    alpha: c64,
    ch: &ChannelParams,
    det: &TrustedDetectorParams,
) -> TrustedMoments {
    let t = det.eta_d * ch.eta();
    let s = (2.0 * t).sqrt();
    let noise = 1.0 + 0.5 * t * ch.excess_noise + det.nu_el;
    TrustedMoments {
        f_q: s * alpha.re,
        f_p: s * alpha.im,
        s_q: 2.0 * t * alpha.re * alpha.re + noise,
        s_p: 2.0 * t * alpha.im * alpha.im + noise,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    Moment,
    Tomography,
}

/// Linear constraints Tr[Γ_i ρ] = γ_i on H_A ⊗ H_B.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub dim_a: usize,
    pub dim_b: usize,
    pub operators: Vec<BlockOperator>,
    pub values: Vec<f64>,
    pub kinds: Vec<ConstraintKind>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dense_operator(&self, i: usize) -> HermitianMatrix {
        self.operators[i].to_dense()
    }

    /// Tr[Γ_i ρ] for every constraint.
    pub fn evaluate(&self, rho: &HermitianMatrix) -> Vec<f64> {
        self.operators.iter().map(|a| a.pair(rho.as_ref())).collect()
    }

    /// max_i |Tr[Γ_i ρ] − γ_i|
    pub fn max_violation(&self, rho: &HermitianMatrix) -> f64 {
        self.evaluate(rho)
            .iter()
            .zip(&self.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Replace the right-hand sides, e.g. with measured expectation values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        out.values = values;
        Ok(out)
    }

    /// Coefficients c with Σ c_i Γ_i = I (the diagonal tomography operators).
    pub fn identity_combination(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.len()];
        for (i, (op, kind)) in self.operators.iter().zip(&self.kinds).enumerate() {
            if *kind == ConstraintKind::Tomography
                && op.terms.len() == 1
                && op.terms[0].row == op.terms[0].col
                && op.terms[0].op.is_none()
            {
                c[i] = 1.0;
            }
        }
        c
    }
}

fn tomography_operators(dim_a: usize, dim_b: usize) -> Vec<BlockOperator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let term = |row, col, coeff| BlockTerm {
        row,
        col,
        coeff,
        op: None,
    };
    let mut out = Vec::with_capacity(dim_a * dim_a);
    for i in 0..dim_a {
        out.push(BlockOperator {
            dim_a,
            dim_b,
            terms: vec![term(i, i, c64::new(1.0, 0.0))],
        });
    }
    for i in 0..dim_a {
        for j in i + 1..dim_a {
            out.push(BlockOperator {
                dim_a,
                dim_b,
                terms: vec![term(i, j, c64::new(s, 0.0)), term(j, i, c64::new(s, 0.0))],
            });
            out.push(BlockOperator {
                dim_a,
                dim_b,
                terms: vec![term(i, j, c64::new(0.0, s)), term(j, i, c64::new(0.0, -s))],
            });
        }
    }
    out
}

/// Value of a tomography operator on Alice's Gram matrix, Tr[B_A · G].
fn tomography_value(op: &BlockOperator, gram: &HermitianMatrix) -> f64 {
    op.terms
        .iter()
        .map(|t| t.coeff * gram.get(t.col, t.row))
        .sum::<c64>()
        .re
}

/// Moment constraints |x⟩⟨x| ⊗ Ô for each state and the tomography of
/// Alice's reduced state. No separate unit-trace constraint is added: it is
/// the sum of the diagonal tomography constraints.
pub fn build_constraint_set(
    c: &Constellation,
    ch: &ChannelParams,
    det: Option<&TrustedDetectorParams>,
    nc: usize,
) -> Result<ConstraintSet> {
    ch.validate()?;
    let dim_a = c.n_states;
    let dim_b = nc + 1;
    let (ops, moments): ([Arc<Mat<c64>>; 4], Vec<[f64; 4]>) = match det {
        None => {
            let o = build_observables(nc)?;
            let m = c
                .states()
                .iter()
                .map(|&a| {
                    let m = expected_moments_untrusted(a, ch);
                    [m.q, m.p, m.n, m.d]
                })
                .collect();
            (
                [
                    Arc::new(o.q.into_mat()),
                    Arc::new(o.p.into_mat()),
                    Arc::new(o.n.into_mat()),
                    Arc::new(o.d.into_mat()),
                ],
                m,
            )
        }
        Some(d) => {
            let o = trusted_observables(nc, d)?;
            let m = c
                .states()
                .iter()
                .map(|&a| {
                    let m = expected_moments_trusted(a, ch, d);
                    [m.f_q, m.f_p, m.s_q, m.s_p]
                })
                .collect();
            (
                [
                    Arc::new(o.f_q.into_mat()),
                    Arc::new(o.f_p.into_mat()),
                    Arc::new(o.s_q.into_mat()),
                    Arc::new(o.s_p.into_mat()),
                ],
                m,
            )
        }
    };
    let mut operators = Vec::new();
    let mut values = Vec::new();
    let mut kinds = Vec::new();
    for x in 0..dim_a {
        for k in 0..4 {
            operators.push(BlockOperator::diagonal_block(dim_a, x, ops[k].clone()));
            values.push(c.probabilities[x] * moments[x][k]);
            kinds.push(ConstraintKind::Moment);
        }
    }
    let gram = alice_gram(c).matrix;
    for op in tomography_operators(dim_a, dim_b) {
        values.push(tomography_value(&op, &gram));
        operators.push(op);
        kinds.push(ConstraintKind::Tomography);
    }
    Ok(ConstraintSet {
        dim_a,
        dim_b,
        operators,
        values,
        kinds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::build_constellation;

    #[test]
    fn transmittance_values() {
        assert_eq!(ChannelParams::new(0.0, 0.0).unwrap().eta(), 1.0);
        assert_eq!(ChannelParams::new(50.0, 0.0).unwrap().eta(), 0.1);
        assert_eq!(ChannelParams::new(100.0, 0.0).unwrap().eta(), 0.01);
        assert!(ChannelParams::new(-1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, -0.1).is_err());
    }

    #[test]
    fn vacuum_moments() {
        let ch = ChannelParams::new(10.0, 0.02).unwrap();
        let m = expected_moments_untrusted(c64::new(0.0, 0.0), &ch);
        assert_eq!((m.q, m.p, m.d), (0.0, 0.0, 0.0));
        assert!((m.n - ch.eta() * 0.01).abs() < 1e-16);
        let det = TrustedDetectorParams::new(0.72, 0.04).unwrap();
        let ch = ChannelParams::new(10.0, 0.0).unwrap();
        let t = expected_moments_trusted(c64::new(0.0, 0.0), &ch, &det);
        assert_eq!((t.f_q, t.f_p), (0.0, 0.0));
        assert!((t.s_q - 1.04).abs() < 1e-15 && (t.s_p - 1.04).abs() < 1e-15);
    }

    #[test]
    fn qpsk_constraint_census() {
        let c = build_constellation(4, 0.8).unwrap();
        let ch = ChannelParams::new(20.0, 0.01).unwrap();
        let cs = build_constraint_set(&c, &ch, None, 6).unwrap();
        assert_eq!(cs.len(), 32);
        let ident = cs.identity_combination();
        assert_eq!(ident.iter().filter(|&&v| v == 1.0).count(), 4);
        let trace: f64 = ident.iter().zip(&cs.values).map(|(c, v)| c * v).sum();
        assert!((trace - 1.0).abs() < 1e-14);
    }
}
