//! Symmetric linear operators applied to column blocks.
//!
//! Block products are computed column by column, each column sequentially,
//! so results are bit-identical for any rayon pool size.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::graph::{ProbabilityMatrix, SparseGraph};

pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// Returns `A * x` for an `n x k` block `x`.
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

fn apply_by_column(
    n: usize,
    x: &DMatrix<f64>,
    col_op: impl Fn(&[f64], &mut [f64]) + Sync,
) -> DMatrix<f64> {
    assert_eq!(x.nrows(), n, "operator dimension mismatch");
    let k = x.ncols();
    let src = x.as_slice();
    let mut out = vec![0.0; n * k];
    if n > 0 {
        out.par_chunks_mut(n)
            .zip(src.par_chunks(n))
            .for_each(|(y, xc)| col_op(xc, y));
    }
    DMatrix::from_vec(n, k, out)
}

impl SymmetricOperator for SparseGraph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        apply_by_column(self.n(), x, |xc, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.neighbors(i).iter().map(|&j| xc[j]).sum();
            }
        })
    }
}

/// Symmetric sparse matrix with explicit weights (CSR, both triangles stored).
#[derive(Clone, Debug)]
pub struct WeightedSparse {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedSparse {
    /// Builds from weighted unordered pairs `(i, j, w)` with `i != j`; each
    /// pair must appear once.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in pairs {
            counts[i + 1] += 1;
            counts[j + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(i, j, w) in pairs {
            targets[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
            targets[fill[j]] = i;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
        WeightedSparse {
            offsets,
            targets,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl SymmetricOperator for WeightedSparse {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        apply_by_column(self.n(), x, |xc, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
                *yi = self.targets[lo..hi]
                    .iter()
                    .zip(&self.weights[lo..hi])
                    .map(|(&j, &w)| w * xc[j])
                    .sum();
            }
        })
    }
}

/// Dense symmetric matrix.
#[derive(Clone, Debug)]
pub struct DenseSymmetric(pub DMatrix<f64>);

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let m = self.0.as_slice();
        // symmetric, so row i of A is column i; y_i = <A[:, i], x>
        apply_by_column(n, x, |xc, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                let col = &m[i * n..(i + 1) * n];
                *yi = col.iter().zip(xc).map(|(a, b)| a * b).sum();
            }
        })
    }
}

impl SymmetricOperator for ProbabilityMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let m = self.matrix().as_slice();
        apply_by_column(n, x, |xc, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                let col = &m[i * n..(i + 1) * n];
                *yi = col.iter().zip(xc).map(|(a, b)| a * b).sum();
            }
        })
    }
}

/// The ER-type assembly of a dense core block with `n_periphery` extra
/// nodes whose rows are the constant `level` off the diagonal. Never
/// materializes the periphery blocks.
#[derive(Clone, Debug)]
pub struct ErAssembled<'a> {
    pub core: &'a DMatrix<f64>,
    pub n_periphery: usize,
    pub level: f64,
}

impl SymmetricOperator for ErAssembled<'_> {
    fn dim(&self) -> usize {
        self.core.nrows() + self.n_periphery
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let nc = self.core.nrows();
        let n = self.dim();
        let q = self.level;
        let core = self.core.as_slice();
        apply_by_column(n, x, |xc, y| {
            let core_x = &xc[..nc];
            let peri_sum: f64 = xc[nc..].iter().sum();
            let total: f64 = core_x.iter().sum::<f64>() + peri_sum;
            for (i, yi) in y[..nc].iter_mut().enumerate() {
                let col = &core[i * nc..(i + 1) * nc];
                let c: f64 = col.iter().zip(core_x).map(|(a, b)| a * b).sum();
                *yi = c + q * peri_sum;
            }
            for (k, yi) in y[nc..].iter_mut().enumerate() {
                *yi = q * (total - xc[nc + k]);
            }
        })
    }
}
