use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

/// Quadratures, photon number and d̂ = q̂² − p̂² on the span of |0⟩..|Nc⟩.
#[derive(Debug, Clone)]
pub struct TruncatedObservables {
    pub q: HermitianMatrix,
    pub p: HermitianMatrix,
    pub n: HermitianMatrix,
    pub d: HermitianMatrix,
}

/// Build q = (a†+a)/√2, p = i(a†−a)/√2, n = diag(0..Nc) and d = q·q − p·p.
pub fn build_observables(nc: usize) -> Result<TruncatedObservables> {
    if nc < 1 {
        return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
    }
    let dim = nc + 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = Mat::from_fn(dim, dim, |i, j| {
        if i + 1 == j || j + 1 == i {
            c64::new((i.max(j) as f64).sqrt() * s, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    // ⟨k+1|p|k⟩ = i√(k+1)/√2 from the a† part
    let p = Mat::from_fn(dim, dim, |i, j| {
        if i == j + 1 {
            c64::new(0.0, (i as f64).sqrt() * s)
        } else if j == i + 1 {
            c64::new(0.0, -(j as f64).sqrt() * s)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let d = &q * &q - &p * &p;
    let n: Vec<f64> = (0..dim).map(|k| k as f64).collect();
    Ok(TruncatedObservables {
        q: HermitianMatrix::new(q)?,
        p: HermitianMatrix::new(p)?,
        n: HermitianMatrix::diagonal(&n),
        d: HermitianMatrix::new(d)?,
    })
}
