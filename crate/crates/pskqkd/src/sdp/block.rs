//! Operators of the form Σ_t c_t |r_t⟩⟨s_t| ⊗ O_t on C^{dim_a} ⊗ C^{dim_b}.
//!
//! Every constraint of the key-rate problem has this shape with one or two
//! terms, which keeps trace pairings and Schur-complement products cheap.

use std::sync::Arc;

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;

#[derive(Debug, Clone)]
pub struct BlockTerm {
    pub row: usize,
    pub col: usize,
    pub coeff: c64,
    /// `None` stands for the identity on the B factor.
    pub op: Option<Arc<Mat<c64>>>,
}

#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub dim_a: usize,
    pub dim_b: usize,
    pub terms: Vec<BlockTerm>,
}

impl BlockOperator {
    /// A dense Hermitian matrix viewed as a single block.
    pub fn dense(m: &HermitianMatrix) -> Self {
        Self {
            dim_a: 1,
            dim_b: m.dim(),
            terms: vec![BlockTerm {
                row: 0,
                col: 0,
                coeff: c64::new(1.0, 0.0),
                op: Some(Arc::new(m.as_mat().clone())),
            }],
        }
    }

    /// |x⟩⟨x| ⊗ O
    pub fn diagonal_block(dim_a: usize, x: usize, op: Arc<Mat<c64>>) -> Self {
        Self {
            dim_a,
            dim_b: op.nrows(),
            terms: vec![BlockTerm {
                row: x,
                col: x,
                coeff: c64::new(1.0, 0.0),
                op: Some(op),
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Check that the term list describes a Hermitian operator.
    pub fn validate(&self) -> Result<()> {
        let d = self.to_dense_raw();
        HermitianMatrix::new(d).map(|_| ())
    }

    fn to_dense_raw(&self) -> Mat<c64> {
        let mut out = Mat::zeros(self.dim(), self.dim());
        self.accumulate(1.0, &mut out);
        out
    }

    pub fn to_dense(&self) -> HermitianMatrix {
        HermitianMatrix::hermitian_part(self.to_dense_raw().as_ref())
    }

    /// out += s · self
    pub fn accumulate(&self, s: f64, out: &mut Mat<c64>) {
        let b = self.dim_b;
        for t in &self.terms {
            let c = t.coeff * s;
            match &t.op {
                None => {
                    for k in 0..b {
                        out[(t.row * b + k, t.col * b + k)] += c;
                    }
                }
                Some(o) => {
                    for j in 0..b {
                        for i in 0..b {
                            out[(t.row * b + i, t.col * b + j)] += c * o[(i, j)];
                        }
                    }
                }
            }
        }
    }

    /// Re Tr[self · X] for a dense X of matching dimension.
    pub fn pair(&self, x: MatRef<'_, c64>) -> f64 {
        let b = self.dim_b;
        let mut acc = c64::new(0.0, 0.0);
        for t in &self.terms {
            // Tr[(|r⟩⟨s| ⊗ O) X] = Tr[O · X_{s,r}]
            let mut tr = c64::new(0.0, 0.0);
            match &t.op {
                None => {
                    for k in 0..b {
                        tr += x[(t.col * b + k, t.row * b + k)];
                    }
                }
                Some(o) => {
                    for l in 0..b {
                        for k in 0..b {
                            tr += o[(k, l)] * x[(t.col * b + l, t.row * b + k)];
                        }
                    }
                }
            }
            acc += t.coeff * tr;
        }
        acc.re
    }

    pub fn pair_hermitian(&self, x: &HermitianMatrix) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(self.pair(x.as_ref()))
    }

    /// Z · self · X for dense Z and X.
    pub fn sandwich(&self, z: MatRef<'_, c64>, x: MatRef<'_, c64>) -> Mat<c64> {
        let n = self.dim();
        let b = self.dim_b;
        let mut out = Mat::<c64>::zeros(n, n);
        for t in &self.terms {
            let xrows = x.subrows(t.col * b, b);
            let zcols = z.subcols(t.row * b, b);
            let ox = match &t.op {
                None => xrows.to_owned(),
                Some(o) => o.as_ref() * xrows,
            };
            let prod = zcols * ox.as_ref();
            out += faer::Scale(t.coeff) * &prod;
        }
        out
    }
}
