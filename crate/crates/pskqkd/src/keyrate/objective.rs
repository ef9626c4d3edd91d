//! f_ε(ρ) = D(D_ε(G(ρ)) ‖ D_ε(Z(G(ρ)))) and its gradient.
//!
//! G(ρ) = K ρ K† has rank at most n = dim(H_A ⊗ H_B), so everything is
//! evaluated on n × n matrices: with P = (K†K)^{1/2} the nonzero spectrum of
//! G(ρ) is that of PρP, and the R-diagonal blocks of G(ρ) are B_z ρ B_z with
//! B_z = 1_A ⊗ √R_z. The remaining d′ − n eigenvalues of D_ε(G(ρ)) all equal
//! ε/d′.

use faer::{c64, Mat, MatRef};

use super::maps::PostprocessingMaps;
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

/// Value and gradient at one point.
#[derive(Debug, Clone)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: HermitianMatrix,
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

fn check(rho: &HermitianMatrix, maps: &PostprocessingMaps, eps: f64) -> Result<()> {
    if rho.dim() != maps.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: maps.input_dim(),
            got: rho.dim(),
        });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("perturbation {eps} must lie in (0, 1)")));
    }
    Ok(())
}

fn sandwich(b: MatRef<'_, c64>, rho: &HermitianMatrix) -> HermitianMatrix {
    let t = b * rho.as_ref();
    HermitianMatrix::hermitian_part((&t * b).as_ref())
}

struct Perturbed {
    scale: f64,
    shift: f64,
    floor: f64,
}

impl Perturbed {
    fn new(eps: f64, d_out: usize) -> Self {
        let shift = eps / d_out as f64;
        Self {
            scale: 1.0 - eps,
            shift,
            floor: 1e-2 * shift,
        }
    }

    fn map(&self, l: f64) -> f64 {
        (self.scale * l + self.shift).max(self.floor)
    }
}

/// Blocks whose spectra enter f: PρP first, then B_z ρ B_z for every z.
fn blocks(rho: &HermitianMatrix, maps: &PostprocessingMaps) -> Vec<HermitianMatrix> {
    let mut out = Vec::with_capacity(maps.n_keys() + 1);
    out.push(sandwich(maps.lifted_total().as_ref(), rho));
    for z in 0..maps.n_keys() {
        out.push(sandwich(maps.lifted(z).as_ref(), rho));
    }
    out
}

fn padding(maps: &PostprocessingMaps, pt: &Perturbed) -> f64 {
    (maps.output_dim() - maps.input_dim()) as f64 * xlog2x(pt.shift)
}

pub fn objective(rho: &HermitianMatrix, maps: &PostprocessingMaps, eps_tilde: f64) -> Result<f64> {
    check(rho, maps, eps_tilde)?;
    let pt = Perturbed::new(eps_tilde, maps.output_dim());
    let mut value = padding(maps, &pt);
    for (i, blk) in blocks(rho, maps).iter().enumerate() {
        let s: f64 = blk.eigenvalues()?.iter().map(|&l| xlog2x(pt.map(l))).sum();
        if i == 0 {
            value += s;
        } else {
            value -= s;
        }
    }
    Ok(value)
}

pub fn evaluate(rho: &HermitianMatrix, maps: &PostprocessingMaps, eps_tilde: f64) -> Result<ObjectiveEval> {
    check(rho, maps, eps_tilde)?;
    let n = maps.input_dim();
    let pt = Perturbed::new(eps_tilde, maps.output_dim());
    let mut value = padding(maps, &pt);
    let mut grad = Mat::<c64>::zeros(n, n);
    for (i, blk) in blocks(rho, maps).iter().enumerate() {
        let sd = blk.eigen()?;
        let mapped: Vec<f64> = sd.eigenvalues.iter().map(|&l| pt.map(l)).collect();
        let s: f64 = mapped.iter().map(|&l| xlog2x(l)).sum();
        let logm = {
            let v = &sd.eigenvectors;
            let w = Mat::from_fn(n, n, |r, c| v[(r, c)] * mapped[c].log2());
            &w * v.adjoint()
        };
        let b = if i == 0 {
            maps.lifted_total().as_ref()
        } else {
            maps.lifted(i - 1).as_ref()
        };
        let term = b * &logm * b;
        if i == 0 {
            value += s;
            grad += &term;
        } else {
            value -= s;
            grad -= &term;
        }
    }
    let gradient = HermitianMatrix::hermitian_part((&grad * pt.scale).as_ref());
    Ok(ObjectiveEval { value, gradient })
}

pub fn gradient(rho: &HermitianMatrix, maps: &PostprocessingMaps, eps_tilde: f64) -> Result<HermitianMatrix> {
    Ok(evaluate(rho, maps, eps_tilde)?.gradient)
}
