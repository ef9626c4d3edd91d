//! PSK constellations and the source-replacement picture of Alice's side.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

/// Equal-amplitude coherent-state constellation with equally spaced phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub n_states: usize,
    pub amplitude: f64,
    pub phases: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl Constellation {
    /// Complex amplitude α_x of state x.
    pub fn state(&self, x: usize) -> c64 {
        c64::from_polar(self.amplitude, self.phases[x])
    }

    pub fn states(&self) -> Vec<c64> {
        (0..self.n_states).map(|x| self.state(x)).collect()
    }
}

/// Uniform PSK constellation.
///
/// Four states sit on the diagonals, (2k+1)π/4. Eight states sit on the axes
/// and diagonals, kπ/4, so that every state lies on the bisector of its
/// key-map wedge. Other sizes use (2k+1)π/N.
pub fn build_constellation(n_states: usize, amplitude: f64) -> Result<Constellation> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "a constellation needs at least 2 states, got {n_states}"
        )));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude {amplitude}")));
    }
    let n = n_states as f64;
    let phases = (0..n_states)
        .map(|k| {
            let k = k as f64;
            if n_states == 8 {
                k * PI / 4.0
            } else {
                (2.0 * k + 1.0) * PI / n
            }
        })
        .collect();
    Ok(Constellation {
        n_states,
        amplitude,
        phases,
        probabilities: vec![1.0 / n; n_states],
    })
}

/// ⟨β|α⟩ for coherent states.
pub fn coherent_overlap(alpha: c64, beta: c64) -> c64 {
    (-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0 + beta.conj() * alpha).exp()
}

/// Fock amplitudes e^{-|α|²/2} α^n/√n! for n = 0..=nc.
pub fn coherent_fock_vector(alpha: c64, nc: usize) -> Vec<c64> {
    let mut v = Vec::with_capacity(nc + 1);
    let mut c = c64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v.push(c);
    for n in 1..=nc {
        c = c * alpha / (n as f64).sqrt();
        v.push(c);
    }
    v
}

/// Reduced state of Alice's register, Σ √(p_x p_y) ⟨ψ_y|ψ_x⟩ |x⟩⟨y|.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceGram {
    pub matrix: HermitianMatrix,
}

pub fn alice_gram(c: &Constellation) -> AliceGram {
    let states = c.states();
    let p = &c.probabilities;
    let m = faer::Mat::from_fn(c.n_states, c.n_states, |i, j| {
        coherent_overlap(states[i], states[j]) * (p[i] * p[j]).sqrt()
    });
    AliceGram {
        matrix: HermitianMatrix::hermitian_part(m.as_ref()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_phases_are_diagonal() {
        let c = build_constellation(4, 0.8).unwrap();
        for (k, &p) in c.phases.iter().enumerate() {
            assert!((p - (2 * k + 1) as f64 * PI / 4.0).abs() < 1e-15);
        }
        assert!(c.probabilities.iter().all(|&p| p == 0.25));
    }

    #[test]
    fn eight_psk_phases_are_axis_aligned() {
        let c = build_constellation(8, 0.9).unwrap();
        for (k, &p) in c.phases.iter().enumerate() {
            assert!((p - k as f64 * PI / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_tiny_constellations() {
        assert!(build_constellation(1, 0.5).is_err());
        assert!(build_constellation(4, -0.5).is_err());
    }

    #[test]
    fn vacuum_overlap_and_fock_vector() {
        let a = c64::new(0.3, -0.4);
        let o = coherent_overlap(a, c64::new(0.0, 0.0));
        assert!((o - c64::new((-0.125f64).exp(), 0.0)).norm() < 1e-15);
        let v = coherent_fock_vector(c64::new(1.0, 0.0), 20);
        assert!((v[2].re - (-0.5f64).exp() / 2f64.sqrt()).abs() < 1e-15);
        let v = coherent_fock_vector(c64::new(0.0, 0.0), 5);
        assert_eq!(v[0], c64::new(1.0, 0.0));
        assert!(v[1..].iter().all(|z| *z == c64::new(0.0, 0.0)));
    }
}
