//! Region operators and moment observables of the trusted noisy heterodyne
//! detector, whose POVM element at outcome y is a displaced thermal state
//! G_y = D(y/√η_d) ρ_th(n̄_d) D†(y/√η_d) / (π η_d).

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::i_pow;
use super::region::{RegionOperatorSet, RegionParams, RegionStrategy};
use crate::error::{Error, Result};
use crate::numerics::special::KahanSum;
use crate::numerics::{ln_binomial, ln_factorial, HermitianMatrix, IncompleteGammaTable};

/// Detector efficiency and electronic noise (shot-noise units), identical
/// for both homodyne arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustedDetectorParams {
    pub eta_d: f64,
    pub nu_el: f64,
}

impl TrustedDetectorParams {
    pub fn new(eta_d: f64, nu_el: f64) -> Result<Self> {
        if !(eta_d > 0.0 && eta_d <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta_d = {eta_d} outside (0, 1]")));
        }
        if !(nu_el >= 0.0) || !nu_el.is_finite() {
            return Err(Error::InvalidParameter(format!("nu_el = {nu_el} must be nonnegative")));
        }
        Ok(Self { eta_d, nu_el })
    }

    /// Thermal occupation of the POVM, (1 − η_d + ν_el)/η_d.
    pub fn n_bar_d(&self) -> f64 {
        (1.0 - self.eta_d + self.nu_el) / self.eta_d
    }

    pub fn a(&self) -> f64 {
        1.0 / (self.eta_d * (1.0 + self.n_bar_d()))
    }

    pub fn b(&self) -> f64 {
        let n = self.n_bar_d();
        self.eta_d * n * (1.0 + n)
    }

    fn require_noise(&self) -> Result<()> {
        Self::new(self.eta_d, self.nu_el)?;
        if self.n_bar_d() <= 0.0 {
            return Err(Error::InvalidParameter(
                "trusted formulas need a noisy detector (n_bar_d > 0); use the untrusted operators".into(),
            ));
        }
        Ok(())
    }

    /// ln C_{n,m} for n ≤ m.
    fn ln_c(&self, n: usize, m: usize) -> f64 {
        let nb = self.n_bar_d();
        let k = (m - n) as f64;
        -PI.ln() - (k / 2.0 + 1.0) * self.eta_d.ln()
            + 0.5 * (ln_factorial(n as u64) - ln_factorial(m as u64))
            + n as f64 * nb.ln()
            - (m as f64 + 1.0) * (1.0 + nb).ln()
    }

    /// ln of 1/(a^{j+1+extra} b^j j!)
    fn ln_weight(&self, j: usize, extra: f64) -> f64 {
        -(j as f64 + 1.0 + extra) * self.a().ln() - j as f64 * self.b().ln() - ln_factorial(j as u64)
    }
}

/// ∫ G_y over the wedge |arg y − center| < half_width, |y| ≥ Δr.
pub fn trusted_wedge_operator(
    nc: usize,
    center: f64,
    half_width: f64,
    delta_r: f64,
    det: &TrustedDetectorParams,
) -> Result<HermitianMatrix> {
    det.require_noise()?;
    if !(delta_r >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta_r = {delta_r}")));
    }
    if !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!("empty wedge (half width {half_width})")));
    }
    let dim = nc + 1;
    let table = IncompleteGammaTable::new(det.a() * delta_r * delta_r, 2 * nc + 4)?;
    let mut mat = Mat::<c64>::zeros(dim, dim);
    for n in 0..dim {
        for m in n..dim {
            let k = m - n;
            let base = det.ln_c(n, m) - (k as f64 / 2.0) * det.a().ln();
            let mut acc = 0.0;
            for j in 0..=n {
                let g = table.half(2 * j + 2 + k);
                acc += (base + ln_binomial(m as u64, (n - j) as u64) + det.ln_weight(j, 0.0)).exp() * g;
            }
            if k == 0 {
                mat[(n, n)] = c64::new(acc * half_width, 0.0);
            } else {
                let kf = k as f64;
                let v = c64::from_polar(acc * (kf * half_width).sin() / kf, -kf * center);
                mat[(n, m)] = v;
                mat[(m, n)] = v.conj();
            }
        }
    }
    Ok(HermitianMatrix::hermitian_part(mat.as_ref()))
}

fn trusted_wedges(
    strategy: RegionStrategy,
    nc: usize,
    delta_r: f64,
    delta_a: f64,
    det: &TrustedDetectorParams,
) -> Result<RegionOperatorSet> {
    let n_sym = strategy.n_symbols();
    let half = PI / n_sym as f64 - delta_a;
    if !(delta_a >= 0.0) || half <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta_a = {delta_a} leaves an empty wedge")));
    }
    let ops = (0..n_sym)
        .map(|z| {
            let center = if n_sym == 8 {
                z as f64 * PI / 4.0
            } else {
                (z as f64 + 0.5) * PI / 2.0
            };
            trusted_wedge_operator(nc, center, half, delta_r, det)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionOperatorSet::new(
        strategy,
        RegionParams {
            delta_r,
            delta_a,
            delta_c: 0.0,
        },
        ops,
    ))
}

/// Trusted-detector analog of the QPSK radial and angular key map.
pub fn trusted_region_ops_ra(
    nc: usize,
    delta_r: f64,
    delta_a: f64,
    det: &TrustedDetectorParams,
) -> Result<RegionOperatorSet> {
    trusted_wedges(RegionStrategy::RadialAngular, nc, delta_r, delta_a, det)
}

/// Trusted-detector analog of the 8PSK radial and angular key map.
pub fn trusted_region_ops_8ra(
    nc: usize,
    delta_r: f64,
    delta_a: f64,
    det: &TrustedDetectorParams,
) -> Result<RegionOperatorSet> {
    trusted_wedges(RegionStrategy::RadialAngular8, nc, delta_r, delta_a, det)
}

fn trusted_cross_sign(z: usize, k: usize, km: usize) -> c64 {
    let s = match z {
        0 => km - k,
        1 => km,
        2 => k,
        _ => 0,
    };
    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
    i_pow(km as i64 - k as i64) * sign
}

/// Trusted-detector analog of the cross-shaped key map.
pub fn trusted_region_ops_cross(
    nc: usize,
    delta_c: f64,
    det: &TrustedDetectorParams,
) -> Result<RegionOperatorSet> {
    det.require_noise()?;
    if !(delta_c >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta_c = {delta_c}")));
    }
    let dim = nc + 1;
    let table = IncompleteGammaTable::new(det.a() * delta_c * delta_c, 2 * nc + 4)?;
    let mut mats = vec![Mat::<c64>::zeros(dim, dim); 4];
    for n in 0..dim {
        for m in n..dim {
            let km = m - n;
            let base = det.ln_c(n, m) - (km as f64 / 2.0) * det.a().ln() - 4f64.ln();
            let mut sums = [KahanSum::new(); 4];
            for j in 0..=n {
                let outer = base + ln_binomial(m as u64, (n - j) as u64) + det.ln_weight(j, 0.0);
                for k in 0..=km {
                    let mut inner = 0.0;
                    for l in 0..=j {
                        inner += ln_binomial(j as u64, l as u64).exp()
                            * table.half(2 * l + k + 1)
                            * table.half(2 * (j - l) + km - k + 1);
                    }
                    let w = (outer + ln_binomial(km as u64, k as u64)).exp() * inner;
                    for (z, s) in sums.iter_mut().enumerate() {
                        s.add(trusted_cross_sign(z, k, km) * w);
                    }
                }
            }
            for (z, s) in sums.iter().enumerate() {
                let v = s.total();
                if km == 0 {
                    mats[z][(n, n)] = c64::new(v.re, 0.0);
                } else {
                    mats[z][(n, m)] = v;
                    mats[z][(m, n)] = v.conj();
                }
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

/// First and second moments of the trusted heterodyne outcome as operators.
#[derive(Debug, Clone)]
pub struct TrustedObservables {
    pub f_q: HermitianMatrix,
    pub f_p: HermitianMatrix,
    pub s_q: HermitianMatrix,
    pub s_p: HermitianMatrix,
}

/// Number-basis representation of F_Q, F_P, S_Q and S_P.
pub fn trusted_observables(nc: usize, det: &TrustedDetectorParams) -> Result<TrustedObservables> {
    det.require_noise()?;
    let dim = nc + 1;
    let ln_pi = PI.ln();
    // π C_{n,n+k} Σ_j C(n+k, n−j) (j+s)!/j! / (a^{j+1+s} b^j)
    let band = |n: usize, k: usize, s: usize| -> f64 {
        let m = n + k;
        (0..=n)
            .map(|j| {
                (ln_pi + det.ln_c(n, m)
                    + ln_binomial(m as u64, (n - j) as u64)
                    + ln_factorial((j + s) as u64)
                    + det.ln_weight(j, s as f64))
                .exp()
            })
            .sum()
    };
    let mut f_q = Mat::<c64>::zeros(dim, dim);
    let mut f_p = Mat::<c64>::zeros(dim, dim);
    let mut s_q = Mat::<c64>::zeros(dim, dim);
    let mut s_p = Mat::<c64>::zeros(dim, dim);
    for n in 0..dim {
        let d = band(n, 0, 1);
        s_q[(n, n)] = c64::new(d, 0.0);
        s_p[(n, n)] = c64::new(d, 0.0);
        if n + 1 < dim {
            let v = band(n, 1, 1) * std::f64::consts::FRAC_1_SQRT_2;
            f_q[(n, n + 1)] = c64::new(v, 0.0);
            f_q[(n + 1, n)] = c64::new(v, 0.0);
            f_p[(n, n + 1)] = c64::new(0.0, -v);
            f_p[(n + 1, n)] = c64::new(0.0, v);
        }
        if n + 2 < dim {
            let v = 0.5 * band(n, 2, 2);
            s_q[(n, n + 2)] = c64::new(v, 0.0);
            s_q[(n + 2, n)] = c64::new(v, 0.0);
            s_p[(n, n + 2)] = c64::new(-v, 0.0);
            s_p[(n + 2, n)] = c64::new(-v, 0.0);
        }
    }
    Ok(TrustedObservables {
        f_q: HermitianMatrix::hermitian_part(f_q.as_ref()),
        f_p: HermitianMatrix::hermitian_part(f_p.as_ref()),
        s_q: HermitianMatrix::hermitian_part(s_q.as_ref()),
        s_p: HermitianMatrix::hermitian_part(s_p.as_ref()),
    })
}
