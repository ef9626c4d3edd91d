//! Special functions, quadrature and Hermitian matrix analysis.

pub mod hermitian;
pub mod quadrature;
pub mod special;

pub use hermitian::{
    kron, matrix_log2, partial_trace_b, psd_project, relative_entropy, von_neumann_entropy,
    HermitianMatrix, SpectralDecomposition,
};
pub use special::{
    binomial, generalized_laguerre, ln_binomial, ln_factorial, upper_incomplete_gamma,
    IncompleteGammaTable,
};
