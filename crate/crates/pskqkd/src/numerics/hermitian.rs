//! Dense Hermitian matrices, spectral calculus and quantum entropies.

use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Relative spectral floor applied before taking logarithms.
pub const SPECTRAL_FLOOR: f64 = 1e-15;

/// Complex Hermitian matrix backed by a dense column-major array.
///
/// Construction validates Hermiticity and then stores the exact Hermitian part,
/// so later products never drift away from self-adjointness.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: Mat<c64>,
}

impl HermitianMatrix {
    /// Validate and wrap a square matrix. Asymmetry up to 1e-10 relative is
    /// accepted and removed.
    pub fn new(m: Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut scale: f64 = 0.0;
        let mut asym: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let a = m[(i, j)];
                if !a.re.is_finite() || !a.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                scale = scale.max(a.norm());
                asym = asym.max((a - m[(j, i)].conj()).norm());
            }
        }
        if asym > 1e-10 * scale.max(1.0) {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self::hermitian_part(m.as_ref()))
    }

    /// (M + M†)/2 without validation.
    pub fn hermitian_part(m: MatRef<'_, c64>) -> Self {
        let n = m.nrows();
        let h = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        });
        Self { m: h }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::new(Mat::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: Mat::identity(n, n) }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Mat::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = c64::new(v, 0.0);
        }
        Self { m }
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        Self::from_fn(n, |i, j| c64::new(rows[i][j], 0.0))
    }

    /// |v⟩⟨v|
    pub fn projector(v: &[c64]) -> Self {
        let n = v.len();
        Self {
            m: Mat::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.m[(i, j)]
    }

    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.m.as_ref()
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.m
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Re Tr[A·B], the real Hilbert-Schmidt pairing of two Hermitian matrices.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let a = self.m[(i, j)];
                let b = other.m[(i, j)];
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut v: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                v = v.max(self.m[(i, j)].norm());
            }
        }
        v
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        (self - other).max_abs()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * s }
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &HermitianMatrix) -> Self {
        Self {
            m: &self.m + &other.m * s,
        }
    }

    /// K·self·K† for a (possibly rectangular) K.
    pub fn congruence(&self, k: MatRef<'_, c64>) -> Self {
        let t = k * self.m.as_ref();
        Self::hermitian_part((&t * k.adjoint()).as_ref())
    }

    /// K†·self·K for a (possibly rectangular) K.
    pub fn adjoint_congruence(&self, k: MatRef<'_, c64>) -> Self {
        let t = k.adjoint() * self.m.as_ref();
        Self::hermitian_part((&t * k).as_ref())
    }

    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        let evd = self
            .m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let s = evd.S().column_vector();
        let eigenvalues = (0..self.dim()).map(|i| s[i].re).collect();
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors: evd.U().to_owned(),
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let v = self
            .m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))?;
        Ok(v)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scaled(rhs)
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<c64>,
}

impl SpectralDecomposition {
    /// V·diag(f(λ))·V†
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let w = Mat::from_fn(n, n, |i, j| self.eigenvectors[(i, j)] * fl[j]);
        HermitianMatrix::hermitian_part((&w * self.eigenvectors.adjoint()).as_ref())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|l| l)
    }

    /// Diagonal of V†·A·V, i.e. ⟨v_k|A|v_k⟩.
    pub fn diagonal_in_basis(&self, a: &HermitianMatrix) -> Vec<f64> {
        let av = a.as_ref() * self.eigenvectors.as_ref();
        let n = self.eigenvalues.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (self.eigenvectors[(i, k)].conj() * av[(i, k)]).re)
                    .sum()
            })
            .collect()
    }
}

fn check_psd(eigs: &[f64], trace: f64) -> Result<()> {
    let lmin = eigs.first().copied().unwrap_or(0.0);
    if lmin < -1e-9 * trace.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd(lmin));
    }
    Ok(())
}

/// log₂ of a PSD matrix with eigenvalues clamped to 1e-15 of the largest.
pub fn matrix_log2(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let sd = m.eigen()?;
    check_psd(&sd.eigenvalues, m.trace())?;
    let lmax = sd.eigenvalues.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(Error::NotPsd(lmax));
    }
    let floor = SPECTRAL_FLOOR * lmax;
    Ok(sd.map(|l| l.max(floor).log2()))
}

/// -Σ λ log₂ λ over the nonnegative part of a spectrum.
pub fn von_neumann_entropy(eigenvalues: &[f64]) -> f64 {
    -eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.log2())
        .sum::<f64>()
}

/// D(ρ‖σ) = Tr[ρ(log₂ρ − log₂σ)].
pub fn relative_entropy(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    if rho == sigma {
        return Ok(0.0);
    }
    let rho_eigs = rho.eigenvalues()?;
    check_psd(&rho_eigs, rho.trace())?;
    let neg_entropy = -von_neumann_entropy(&rho_eigs);

    let sd = sigma.eigen()?;
    check_psd(&sd.eigenvalues, sigma.trace())?;
    let lmax = sd.eigenvalues.last().copied().unwrap_or(0.0);
    let floor = SPECTRAL_FLOOR * lmax.max(0.0);
    let weights = sd.diagonal_in_basis(rho);
    let mut outside = 0.0;
    let mut cross = 0.0;
    for (&l, &w) in sd.eigenvalues.iter().zip(&weights) {
        if l <= floor {
            outside += w.max(0.0);
        } else {
            cross += w * l.log2();
        }
    }
    if outside > 1e-8 {
        return Err(Error::SupportViolation(outside));
    }
    Ok(neg_entropy - cross)
}

/// Tr_B of an operator on C^{dim_a} ⊗ C^{dim_b}.
pub fn partial_trace_b(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    if m.dim() != dim_a * dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_a * dim_b,
            got: m.dim(),
        });
    }
    let out = Mat::from_fn(dim_a, dim_a, |i, j| {
        let mut acc = c64::new(0.0, 0.0);
        for k in 0..dim_b {
            acc += m.get(i * dim_b + k, j * dim_b + k);
        }
        acc
    });
    Ok(HermitianMatrix::hermitian_part(out.as_ref()))
}

/// Clip negative eigenvalues and restore the input trace.
///
/// Returns the magnitude of the most negative eigenvalue. Inputs whose
/// spectrum is nonnegative up to rounding are returned unchanged.
pub fn psd_project(m: &HermitianMatrix) -> Result<(HermitianMatrix, f64)> {
    let sd = m.eigen()?;
    let lmin = sd.eigenvalues.first().copied().unwrap_or(0.0);
    let scale = sd
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, &l| a.max(l.abs()))
        .max(f64::MIN_POSITIVE);
    if lmin >= -1e-14 * scale {
        return Ok((m.clone(), 0.0));
    }
    let trace = m.trace();
    let clipped_sum: f64 = sd.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let factor = if clipped_sum > 0.0 { trace / clipped_sum } else { 0.0 };
    let projected = sd.map(|l| l.max(0.0) * factor);
    Ok((projected, -lmin))
}

/// Kronecker product A ⊗ B.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_of_identity_is_zero() {
        let l = matrix_log2(&HermitianMatrix::identity(3)).unwrap();
        assert!(l.max_abs() < 1e-15);
        let l = matrix_log2(&HermitianMatrix::diagonal(&[2.0, 2.0])).unwrap();
        assert!(l.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn log_rejects_indefinite() {
        let m = HermitianMatrix::diagonal(&[1.0, -0.5]);
        assert!(matches!(matrix_log2(&m), Err(Error::NotPsd(_))));
    }

    #[test]
    fn classical_relative_entropies() {
        let r = relative_entropy(
            &HermitianMatrix::diagonal(&[1.0, 0.0]),
            &HermitianMatrix::diagonal(&[0.5, 0.5]),
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        let r = relative_entropy(
            &HermitianMatrix::diagonal(&[0.5, 0.5]),
            &HermitianMatrix::diagonal(&[0.9, 0.1]),
        )
        .unwrap();
        let expect = 0.5 * (0.5f64 / 0.9).log2() + 0.5 * (0.5f64 / 0.1).log2();
        assert!((r - expect).abs() < 1e-14);
        let rho = HermitianMatrix::diagonal(&[0.3, 0.7]);
        assert_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0);
    }

    #[test]
    fn support_violation_is_reported() {
        let r = relative_entropy(
            &HermitianMatrix::diagonal(&[0.5, 0.5]),
            &HermitianMatrix::diagonal(&[1.0, 0.0]),
        );
        assert!(matches!(r, Err(Error::SupportViolation(_))));
    }

    #[test]
    fn psd_project_clips_and_rescales() {
        let (p, v) = psd_project(&HermitianMatrix::diagonal(&[1.1, -0.1])).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        assert!(p.max_abs_diff(&HermitianMatrix::diagonal(&[1.0, 0.0])) < 1e-15);
        let psd = HermitianMatrix::diagonal(&[0.2, 0.8]);
        let (q, v) = psd_project(&psd).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(q, psd);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| c64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
        let m = Mat::from_fn(2, 2, |_, _| c64::new(f64::NAN, 0.0));
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NonFinite)));
    }

    #[test]
    fn partial_trace_dimension_check() {
        let m = HermitianMatrix::identity(6);
        assert!(partial_trace_b(&m, 4, 2).is_err());
        let t = partial_trace_b(&m, 3, 2).unwrap();
        assert!(t.max_abs_diff(&HermitianMatrix::diagonal(&[2.0; 3])) < 1e-15);
    }
}
