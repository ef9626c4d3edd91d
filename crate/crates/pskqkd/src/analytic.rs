//! Loss-only reference rates under the generalized beamsplitter attack, and
//! the heterodyne bit-error-rate map of the QPSK constellation.
//!
//! Nothing here touches the truncated Fock-space operators: wedge
//! probabilities come from direct quadrature of the heterodyne density.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate;
use crate::numerics::{von_neumann_entropy, HermitianMatrix};
use crate::protocol::build_constellation;

/// Eve's states |ε_x⟩ = |b e^{iφ_x}⟩ expanded in the orthonormal basis built
/// from the number states of each residue class mod N.
#[derive(Debug, Clone)]
pub struct EveBasis {
    pub n_states: usize,
    /// Σ_{n ≡ k mod N} b^{2n}/n!
    pub norms: Vec<f64>,
    /// Column x holds ⟨e_k|ε_x⟩.
    pub overlap_matrix: Mat<c64>,
}

impl EveBasis {
    pub fn state(&self, x: usize) -> Vec<c64> {
        (0..self.n_states).map(|k| self.overlap_matrix[(k, x)]).collect()
    }
}

/// Residue-class sums Σ_{n ≡ k} b^{2n}/n!, summed until the terms stop mattering.
pub fn residue_norms(n_states: usize, b: f64) -> Vec<f64> {
    let x = b * b;
    let mut norms = vec![0.0; n_states];
    let mut term = 1.0;
    let mut n = 0usize;
    loop {
        norms[n % n_states] += term;
        n += 1;
        term *= x / n as f64;
        let total: f64 = norms.iter().sum();
        if term < 1e-18 * total && n as f64 > x {
            break;
        }
        if n > 100_000 {
            break;
        }
    }
    norms
}

pub fn eve_basis(n_states: usize, eve_amp: f64) -> Result<EveBasis> {
    if n_states < 2 {
        return Err(Error::InvalidParameter(format!("{n_states} states")));
    }
    if !(eve_amp >= 0.0) || !eve_amp.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude {eve_amp}")));
    }
    let norms = residue_norms(n_states, eve_amp);
    let damp = (-eve_amp * eve_amp / 2.0).exp();
    let step = 2.0 * PI / n_states as f64;
    // the common phase of the constellation only rotates each basis vector
    let overlap_matrix = Mat::from_fn(n_states, n_states, |k, x| {
        c64::from_polar(damp * norms[k].sqrt(), (k * x) as f64 * step)
    });
    Ok(EveBasis {
        n_states,
        norms,
        overlap_matrix,
    })
}

/// ∫ over wedge `wedge_index` of (1/π) e^{−|γ−c|²} d²γ. Wedges have width
/// 2π/N and are centered on the signal phases of the N-state constellation.
pub fn wedge_probability(state_center: c64, wedge_index: usize, n_states: usize) -> Result<f64> {
    let c = build_constellation(n_states, 1.0)?;
    if wedge_index >= n_states {
        return Err(Error::InvalidParameter(format!("wedge {wedge_index} of {n_states}")));
    }
    let center = c.phases[wedge_index];
    let half = PI / n_states as f64;
    Ok(wedge_integral(state_center, center - half, center + half))
}

/// Angular integral after doing the radial one in closed form.
fn wedge_integral(c: c64, theta0: f64, theta1: f64) -> f64 {
    let r = c.norm();
    let phi = c.arg();
    let tail = (-r * r).exp();
    let f = |theta: f64| {
        let u = r * (theta - phi).cos();
        let v = r * (theta - phi).sin();
        (0.5 * tail + 0.5 * PI.sqrt() * u * (-v * v).exp() * erfc(-u)) / PI
    };
    integrate(f, theta0, theta1, 1e-13, 1e-12).0
}

/// P(z = j | x = i) for the loss-only channel with transmittance η.
pub fn wedge_matrix(n_states: usize, amplitude: f64, eta: f64) -> Result<Vec<Vec<f64>>> {
    let c = build_constellation(n_states, amplitude)?;
    let s0 = c.state(0) * eta.sqrt();
    // the table only depends on j − i
    let row: Vec<f64> = (0..n_states)
        .map(|j| wedge_probability(s0, j, n_states))
        .collect::<Result<_>>()?;
    Ok((0..n_states)
        .map(|i| (0..n_states).map(|j| row[(j + n_states - i) % n_states]).collect())
        .collect())
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

/// Components of the loss-only rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossOnlyRate {
    pub mutual_information: f64,
    pub holevo: f64,
    pub rate: f64,
}

pub fn lossonly_rate(n_states: usize, amplitude: f64, eta: f64, beta: f64) -> Result<LossOnlyRate> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("transmittance {eta}")));
    }
    let n = n_states;
    let p = 1.0 / n as f64;
    let cond = wedge_matrix(n, amplitude, eta)?;
    let joint: Vec<Vec<f64>> = cond.iter().map(|r| r.iter().map(|v| v * p).collect()).collect();
    let pz: Vec<f64> = (0..n).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    let mutual_information = shannon(&vec![p; n]) + shannon(&pz) - shannon(&flat);

    let eve = eve_basis(n, (1.0 - eta).sqrt() * amplitude)?;
    let states: Vec<Vec<c64>> = (0..n).map(|x| eve.state(x)).collect();
    let mix = |w: &[f64]| -> Result<f64> {
        let m = Mat::from_fn(n, n, |a, b| {
            states
                .iter()
                .zip(w)
                .map(|(v, &wi)| v[a] * v[b].conj() * wi)
                .sum::<c64>()
        });
        Ok(von_neumann_entropy(&HermitianMatrix::hermitian_part(m.as_ref()).eigenvalues()?))
    };
    let mut holevo = mix(&vec![p; n])?;
    for j in 0..n {
        if pz[j] > 0.0 {
            let w: Vec<f64> = (0..n).map(|i| joint[i][j] / pz[j]).collect();
            holevo -= pz[j] * mix(&w)?;
        }
    }
    let holevo = holevo.max(0.0);
    Ok(LossOnlyRate {
        mutual_information,
        holevo,
        rate: beta * mutual_information - holevo,
    })
}

/// β I(A:B) − χ(B:E) for a pure-loss channel.
pub fn lossonly_keyrate(n_states: usize, amplitude: f64, eta: f64, beta: f64) -> Result<f64> {
    Ok(lossonly_rate(n_states, amplitude, eta, beta)?.rate)
}

/// Upper end of the amplitude search in [`find_optimal_alpha`].
pub const ALPHA_SEARCH_MAX: f64 = 2.0;

/// Grid search over α ∈ {step, 2·step, …} up to [`ALPHA_SEARCH_MAX`];
/// ties go to the smaller amplitude.
pub fn find_optimal_alpha(n_states: usize, eta: f64, beta: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step {step}")));
    }
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut k = 1usize;
    loop {
        // twelve significant digits keep grid values like 0.7 exact
        let a: f64 = format!("{:.11e}", k as f64 * step).parse().unwrap_or(k as f64 * step);
        if a > ALPHA_SEARCH_MAX + 1e-12 {
            break;
        }
        let r = lossonly_keyrate(n_states, a, eta, beta)?;
        if r > best.1 {
            best = (a, r);
        }
        k += 1;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerConfig {
    pub amplitude: f64,
    /// Weight of each QPSK state, in the order of the constellation.
    pub weights: Vec<f64>,
    /// The grid covers [−extent, extent]² in both quadratures.
    pub extent: f64,
    pub resolution: usize,
}

impl BerConfig {
    pub fn new(amplitude: f64, resolution: usize) -> Self {
        Self {
            amplitude,
            weights: vec![0.0, 1.0, 2.0, 1.0],
            extent: 3.0 * amplitude,
            resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerGrid {
    pub coords: Vec<f64>,
    /// values[row][col] at γ = coords[col] + i·coords[row].
    pub values: Vec<Vec<f64>>,
}

/// ½ Σ w_k e^{−|α_k−γ|²} / Σ e^{−|α_k−γ|²}
pub fn ber_value(gamma: c64, amplitude: f64, weights: &[f64]) -> Result<f64> {
    let c = build_constellation(weights.len(), amplitude)?;
    let d: Vec<f64> = c.states().iter().map(|a| (a - gamma).norm_sqr()).collect();
    // shift by the smallest distance so far-out points do not underflow
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = d.iter().map(|v| (-(v - dmin)).exp()).collect();
    let num: f64 = e.iter().zip(weights).map(|(a, w)| a * w).sum();
    Ok(0.5 * num / e.iter().sum::<f64>())
}

pub fn ber_map(cfg: &BerConfig) -> Result<BerGrid> {
    if cfg.resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be at least 2".into()));
    }
    if !(cfg.extent > 0.0) {
        return Err(Error::InvalidParameter(format!("extent {}", cfg.extent)));
    }
    let m = (cfg.resolution - 1) as f64;
    let coords: Vec<f64> = (0..cfg.resolution)
        .map(|i| cfg.extent * (2.0 * i as f64 - m) / m)
        .collect();
    let values = coords
        .iter()
        .map(|&p| {
            coords
                .iter()
                .map(|&q| ber_value(c64::new(q, p), cfg.amplitude, &cfg.weights))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(BerGrid { coords, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_match_roots_of_unity_sum() {
        for &(n, b) in &[(4usize, 0.5f64), (8, 1.3), (4, 2.0)] {
            let norms = residue_norms(n, b);
            for (k, &v) in norms.iter().enumerate() {
                let closed: f64 = (0..n)
                    .map(|j| {
                        let w = c64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                        (c64::new(b * b, 0.0) * w).exp() * w.powi(-(k as i32))
                    })
                    .sum::<c64>()
                    .re
                    / n as f64;
                assert!((v - closed).abs() < 1e-13 * closed.abs().max(1.0), "{n} {b} {k}");
            }
        }
    }

    #[test]
    fn eve_states_are_normalized() {
        let e = eve_basis(4, 0.7).unwrap();
        for x in 0..4 {
            let s: f64 = e.state(x).iter().map(|z| z.norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wedges_partition_the_plane() {
        let c = c64::new(0.4, -0.9);
        for n in [4usize, 8] {
            let s: f64 = (0..n).map(|j| wedge_probability(c, j, n).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10);
            let origin = wedge_probability(c64::new(0.0, 0.0), 1, n).unwrap();
            assert!((origin - 1.0 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn no_loss_means_no_eve() {
        let r = lossonly_rate(4, 0.8, 1.0, 0.95).unwrap();
        assert!(r.holevo.abs() < 1e-12);
        assert!((r.rate - 0.95 * r.mutual_information).abs() < 1e-12);
    }

    #[test]
    fn ber_origin_is_one_half() {
        let v = ber_value(c64::new(0.0, 0.0), 0.8, &[0.0, 1.0, 2.0, 1.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }
}
