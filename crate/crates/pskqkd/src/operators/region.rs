//! Region operators of the ideal heterodyne detector.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::i_pow;
use crate::error::{Error, Result};
use crate::numerics::special::KahanSum;
use crate::numerics::{ln_binomial, ln_factorial, HermitianMatrix, IncompleteGammaTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionStrategy {
    /// Four wedges with radial and angular postselection.
    RadialAngular,
    /// Four quadrants shifted away from the axes.
    Cross,
    /// Eight wedges with radial and angular postselection.
    RadialAngular8,
}

impl RegionStrategy {
    pub fn n_symbols(&self) -> usize {
        match self {
            RegionStrategy::RadialAngular8 => 8,
            _ => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegionStrategy::RadialAngular => "raPS",
            RegionStrategy::Cross => "cPS",
            RegionStrategy::RadialAngular8 => "8raPS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionParams {
    pub delta_r: f64,
    pub delta_a: f64,
    pub delta_c: f64,
}

/// Key-map POVM on the truncated Fock space: one operator per symbol plus
/// the discard element R_⊥ = I − Σ_z R_z.
#[derive(Debug, Clone)]
pub struct RegionOperatorSet {
    pub strategy: RegionStrategy,
    pub params: RegionParams,
    pub ops: Vec<HermitianMatrix>,
    pub discard: HermitianMatrix,
}

impl RegionOperatorSet {
    pub fn new(strategy: RegionStrategy, params: RegionParams, ops: Vec<HermitianMatrix>) -> Self {
        let dim = ops[0].dim();
        let mut discard = HermitianMatrix::identity(dim);
        for op in &ops {
            discard = &discard - op;
        }
        Self {
            strategy,
            params,
            ops,
            discard,
        }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn n_symbols(&self) -> usize {
        self.ops.len()
    }

    /// max-norm deviation of Σ_z R_z from the identity.
    pub fn completeness_defect(&self) -> f64 {
        self.discard.max_abs()
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be a finite nonnegative number")));
    }
    Ok(())
}

/// (1/π)∫ |γ⟩⟨γ| over the wedge |arg γ − center| < half_width, |γ| ≥ Δr.
pub fn wedge_operator(nc: usize, center: f64, half_width: f64, delta_r: f64) -> Result<HermitianMatrix> {
    check_nonneg("delta_r", delta_r)?;
    if !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!("empty wedge (half width {half_width})")));
    }
    let dim = nc + 1;
    let table = IncompleteGammaTable::new(delta_r * delta_r, 2 * nc + 2)?;
    let m = Mat::from_fn(dim, dim, |n, m| {
        if n == m {
            let v = table.int(n + 1) / (PI * ln_factorial(n as u64).exp()) * half_width;
            return c64::new(v, 0.0);
        }
        let k = m as f64 - n as f64;
        let ln_mag = table.half(n + m + 2).ln()
            - 0.5 * (ln_factorial(n as u64) + ln_factorial(m as u64));
        let mag = ln_mag.exp() / PI * (k * half_width).sin() / k;
        c64::from_polar(mag, -k * center)
    });
    Ok(HermitianMatrix::hermitian_part(m.as_ref()))
}

/// Wedge key map for `n_wedges` symbols with wedges centered at `centers`.
pub fn wedge_region_ops(
    nc: usize,
    centers: &[f64],
    delta_r: f64,
    delta_a: f64,
) -> Result<Vec<HermitianMatrix>> {
    check_nonneg("delta_a", delta_a)?;
    let half = PI / centers.len() as f64 - delta_a;
    if half <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta_a = {delta_a} leaves an empty wedge for {} symbols",
            centers.len()
        )));
    }
    centers
        .iter()
        .map(|&c| wedge_operator(nc, c, half, delta_r))
        .collect()
}

/// QPSK radial and angular postselection, wedges centered at (z+½)π/2.
pub fn region_ops_ra(nc: usize, delta_r: f64, delta_a: f64) -> Result<RegionOperatorSet> {
    let centers: Vec<f64> = (0..4).map(|z| (z as f64 + 0.5) * PI / 2.0).collect();
    let ops = wedge_region_ops(nc, &centers, delta_r, delta_a)?;
    Ok(RegionOperatorSet::new(
        RegionStrategy::RadialAngular,
        RegionParams {
            delta_r,
            delta_a,
            delta_c: 0.0,
        },
        ops,
    ))
}

/// 8PSK radial and angular postselection, wedges centered at zπ/4.
pub fn region_ops_8ra(nc: usize, delta_r: f64, delta_a: f64) -> Result<RegionOperatorSet> {
    let centers: Vec<f64> = (0..8).map(|z| z as f64 * PI / 4.0).collect();
    let ops = wedge_region_ops(nc, &centers, delta_r, delta_a)?;
    Ok(RegionOperatorSet::new(
        RegionStrategy::RadialAngular8,
        RegionParams {
            delta_r,
            delta_a,
            delta_c: 0.0,
        },
        ops,
    ))
}

/// Phase factor of the cross-shaped elements for quadrant z.
pub(crate) fn cross_sign(z: usize, j: usize, k: usize, m: usize, n: usize) -> c64 {
    let p = n as i64 - m as i64 + k as i64 - j as i64;
    let s = match z {
        0 => 0,
        1 => k as i64 - j as i64,
        2 => n as i64 - m as i64,
        _ => p,
    };
    let sign = if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    i_pow(p) * sign
}

/// QPSK cross-shaped postselection: quadrants with |Re|, |Im| ≥ Δc.
pub fn region_ops_cross(nc: usize, delta_c: f64) -> Result<RegionOperatorSet> {
    check_nonneg("delta_c", delta_c)?;
    let dim = nc + 1;
    let table = IncompleteGammaTable::new(delta_c * delta_c, 2 * nc + 2)?;
    let mut mats = vec![Mat::<c64>::zeros(dim, dim); 4];
    for n in 0..dim {
        for m in n..dim {
            let norm = -0.5 * (ln_factorial(n as u64) + ln_factorial(m as u64)) - (4.0 * PI).ln();
            if n == m {
                let mut acc = 0.0;
                for j in 0..=n {
                    acc += (ln_binomial(n as u64, j as u64) + norm).exp()
                        * table.half(2 * j + 1)
                        * table.half(2 * (n - j) + 1);
                }
                for mat in mats.iter_mut() {
                    mat[(n, n)] = c64::new(acc, 0.0);
                }
                continue;
            }
            let mut sums = [KahanSum::new(); 4];
            for j in 0..=n {
                for k in 0..=m {
                    let w = (ln_binomial(n as u64, j as u64) + ln_binomial(m as u64, k as u64) + norm).exp()
                        * table.half(j + k + 1)
                        * table.half(n + m - j - k + 1);
                    for (z, s) in sums.iter_mut().enumerate() {
                        s.add(cross_sign(z, j, k, m, n) * w);
                    }
                }
            }
            for (z, s) in sums.iter().enumerate() {
                let v = s.total();
                mats[z][(n, m)] = v;
                mats[z][(m, n)] = v.conj();
            }
        }
    }
    let ops = mats
        .iter()
        .map(|m| HermitianMatrix::hermitian_part(m.as_ref()))
        .collect();
    Ok(RegionOperatorSet::new(
        RegionStrategy::Cross,
        RegionParams {
            delta_r: 0.0,
            delta_a: 0.0,
            delta_c,
        },
        ops,
    ))
}
