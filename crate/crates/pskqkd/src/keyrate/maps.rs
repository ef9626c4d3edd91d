//! The key map G(ρ) = KρK† with K = Σ_z |z⟩_R ⊗ 1_A ⊗ √R_z, and the
//! pinching Z over the R register.

use std::ops::Range;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::numerics::{kron, HermitianMatrix};
use crate::operators::RegionOperatorSet;

#[derive(Debug, Clone)]
pub struct PostprocessingMaps {
    pub dim_a: usize,
    pub dim_b: usize,
    pub region_set: RegionOperatorSet,
    /// Row ranges of K belonging to each key symbol.
    pub pinching_blocks: Vec<Range<usize>>,
    sqrt_regions: Vec<HermitianMatrix>,
    /// 1_A ⊗ √R_z
    lifted: Vec<Mat<c64>>,
    /// (K†K)^{1/2} = 1_A ⊗ (Σ_z R_z)^{1/2}
    lifted_total: Mat<c64>,
}

fn psd_sqrt(r: &HermitianMatrix) -> Result<HermitianMatrix> {
    let sd = r.eigen()?;
    let lmin = sd.eigenvalues.first().copied().unwrap_or(0.0);
    if lmin < -1e-8 {
        return Err(Error::NotPsd(lmin));
    }
    Ok(sd.map(|l| l.max(0.0).sqrt()))
}

pub fn build_maps(region_set: RegionOperatorSet, dim_a: usize) -> Result<PostprocessingMaps> {
    if dim_a == 0 {
        return Err(Error::InvalidParameter("dim_a must be positive".into()));
    }
    let dim_b = region_set.dim();
    let sqrt_regions = region_set
        .ops
        .iter()
        .map(psd_sqrt)
        .collect::<Result<Vec<_>>>()?;
    let mut total = HermitianMatrix::zeros(dim_b);
    for r in &region_set.ops {
        total = &total + r;
    }
    let sqrt_total = psd_sqrt(&total)?;
    let id_a = Mat::<c64>::identity(dim_a, dim_a);
    let lifted = sqrt_regions
        .iter()
        .map(|s| kron(id_a.as_ref(), s.as_ref()))
        .collect();
    let lifted_total = kron(id_a.as_ref(), sqrt_total.as_ref());
    let n = dim_a * dim_b;
    let pinching_blocks = (0..region_set.n_symbols()).map(|z| z * n..(z + 1) * n).collect();
    Ok(PostprocessingMaps {
        dim_a,
        dim_b,
        region_set,
        pinching_blocks,
        sqrt_regions,
        lifted,
        lifted_total,
    })
}

impl PostprocessingMaps {
    /// Dimension of the input space H_A ⊗ H_B.
    pub fn input_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Dimension d′ of the output space H_R ⊗ H_A ⊗ H_B.
    pub fn output_dim(&self) -> usize {
        self.n_keys() * self.input_dim()
    }

    pub fn n_keys(&self) -> usize {
        self.sqrt_regions.len()
    }

    /// √R_z on Bob's space.
    pub fn sqrt_region(&self, z: usize) -> &HermitianMatrix {
        &self.sqrt_regions[z]
    }

    pub(crate) fn lifted(&self, z: usize) -> &Mat<c64> {
        &self.lifted[z]
    }

    pub(crate) fn lifted_total(&self) -> &Mat<c64> {
        &self.lifted_total
    }

    /// Dense K (d′ × n).
    pub fn kraus(&self) -> Mat<c64> {
        let n = self.input_dim();
        let mut k = Mat::<c64>::zeros(self.output_dim(), n);
        for (z, l) in self.lifted.iter().enumerate() {
            k.as_mut().subrows_mut(z * n, n).copy_from(l);
        }
        k
    }

    /// K†K = 1_A ⊗ Σ_z R_z
    pub fn kraus_gram(&self) -> HermitianMatrix {
        let t = self.lifted_total.as_ref();
        HermitianMatrix::hermitian_part((t * t).as_ref())
    }

    /// G(ρ) as a dense d′ × d′ matrix.
    pub fn apply(&self, rho: &HermitianMatrix) -> HermitianMatrix {
        rho.congruence(self.kraus().as_ref())
    }

    /// Z(σ): zero every off-diagonal block of the R register.
    pub fn pinch(&self, sigma: &HermitianMatrix) -> HermitianMatrix {
        let d = sigma.dim();
        let mut out = Mat::<c64>::zeros(d, d);
        for b in &self.pinching_blocks {
            let len = b.end - b.start;
            out.as_mut()
                .submatrix_mut(b.start, b.start, len, len)
                .copy_from(sigma.as_ref().submatrix(b.start, b.start, len, len));
        }
        HermitianMatrix::hermitian_part(out.as_ref())
    }
}
