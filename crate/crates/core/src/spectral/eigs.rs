//! Truncated symmetric eigendecomposition by restarted block Krylov
//! iteration with full reorthogonalization and Rayleigh-Ritz extraction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::{EigenOrder, SpectralDecomposition};
use crate::error::{CorexError, Result};
use crate::linop::SymmetricOperator;
use crate::rng::{derive_seed, stream_rng, tag};

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub rank: usize,
    /// Relative residual target: `|A u - l u| <= tol * max(1, |l_1|)`.
    pub tol: f64,
    /// Budget of block operator applications.
    pub max_sweeps: usize,
    pub oversample: usize,
    /// Upper bound on the Krylov basis size per restart cycle.
    pub max_basis: usize,
    pub seed: u64,
    pub order: EigenOrder,
}

impl EigenOptions {
    pub fn new(rank: usize) -> Self {
        EigenOptions {
            rank,
            tol: 1e-8,
            max_sweeps: 300,
            oversample: 10,
            max_basis: 320,
            seed: 0,
            order: EigenOrder::Magnitude,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn order(mut self, order: EigenOrder) -> Self {
        self.order = order;
        self
    }
}

/// Grows an orthonormal basis stored column-wise in `basis[.., ..len]`.
struct Basis {
    cols: DMatrix<f64>,
    len: usize,
}

impl Basis {
    fn with_capacity(n: usize, cap: usize) -> Self {
        Basis {
            cols: DMatrix::zeros(n, cap),
            len: 0,
        }
    }

    fn capacity(&self) -> usize {
        self.cols.ncols()
    }

    /// Orthonormalizes the columns of `block` against the basis and each
    /// other (two Gram-Schmidt passes), appends the survivors, and returns
    /// them. Columns that are numerically dependent are dropped.
    fn extend(&mut self, block: &DMatrix<f64>) -> DMatrix<f64> {
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for c in 0..block.ncols() {
            if self.len + kept.len() >= self.capacity() {
                break;
            }
            let mut v = block.column(c).into_owned();
            let start = v.norm();
            if start == 0.0 || !start.is_finite() {
                continue;
            }
            for _ in 0..2 {
                if self.len > 0 {
                    let q = self.cols.columns(0, self.len);
                    let coef = q.tr_mul(&v);
                    v -= q * coef;
                }
                for u in &kept {
                    let d = u.dot(&v);
                    v.axpy(-d, u, 1.0);
                }
            }
            let norm = v.norm();
            if norm <= 1e-10 * start {
                continue;
            }
            kept.push(v / norm);
        }
        let mut out = DMatrix::zeros(block.nrows(), kept.len());
        for (k, v) in kept.into_iter().enumerate() {
            self.cols.set_column(self.len + k, &v);
            out.set_column(k, &v);
        }
        self.len += out.ncols();
        out
    }

    fn view(&self) -> nalgebra::DMatrixView<'_, f64> {
        self.cols.columns(0, self.len)
    }
}

fn selection_order(values: &[f64], order: EigenOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match order {
        EigenOrder::Magnitude => idx.sort_by(|&a, &b| {
            values[b]
                .abs()
                .total_cmp(&values[a].abs())
                .then(values[b].total_cmp(&values[a]))
                .then(a.cmp(&b))
        }),
        EigenOrder::Signed => {
            idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)))
        }
    }
    idx
}

/// Computes the `rank` extremal eigenpairs of `op` (by magnitude, or by
/// signed value when `order` is `Signed`).
pub fn truncated_eigs<O>(op: &O, opts: &EigenOptions) -> Result<SpectralDecomposition>
where
    O: SymmetricOperator + ?Sized,
{
    let n = op.dim();
    let r = opts.rank;
    if r == 0 {
        return Err(CorexError::domain("rank must be positive"));
    }
    if r >= n {
        return Err(CorexError::domain(format!("rank {r} must be smaller than n = {n}")));
    }
    let b = (r + opts.oversample).min(n);
    let cap = opts.max_basis.max(2 * b).min(n);

    let key = derive_seed(opts.seed, &[tag::EIGEN_START]);
    let mut block = DMatrix::zeros(n, b);
    for c in 0..b {
        let mut rng = stream_rng(key, c as u64);
        for i in 0..n {
            block[(i, c)] = StandardNormal.sample(&mut rng);
        }
    }

    let mut sweeps = 0usize;
    loop {
        let mut basis = Basis::with_capacity(n, cap);
        let mut images = DMatrix::<f64>::zeros(n, cap);
        let mut next = basis.extend(&block);
        while next.ncols() > 0 {
            let offset = basis.len - next.ncols();
            let img = op.apply(&next);
            sweeps += 1;
            images.columns_mut(offset, next.ncols()).copy_from(&img);
            if basis.len >= cap || sweeps >= opts.max_sweeps {
                break;
            }
            next = basis.extend(&img);
        }
        let m = basis.len;
        let q = basis.view();
        let aq = images.columns(0, m);
        let t = q.tr_mul(&aq);
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let ranked = selection_order(eig.eigenvalues.as_slice(), opts.order);
        let keep = b.min(m);

        let mut coeffs = DMatrix::zeros(m, keep);
        let mut values = Vec::with_capacity(keep);
        for (k, &idx) in ranked.iter().take(keep).enumerate() {
            coeffs.set_column(k, &eig.eigenvectors.column(idx));
            values.push(eig.eigenvalues[idx]);
        }
        let ritz = q * &coeffs;
        let ritz_img = aq * &coeffs;

        let scale = values.first().map_or(1.0, |v| v.abs().max(1.0));
        let residual = (0..r)
            .map(|k| (ritz_img.column(k) - ritz.column(k) * values[k]).norm())
            .fold(0.0_f64, f64::max);
        let exhausted = m == n || m < b;
        if residual <= opts.tol * scale || exhausted {
            let mut vectors = ritz.columns(0, r).into_owned();
            for mut col in vectors.column_iter_mut() {
                let pivot = col.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs()));
                if pivot.is_some_and(|p| p < 0.0) {
                    col.neg_mut();
                }
            }
            return Ok(SpectralDecomposition::new(values[..r].to_vec(), vectors, opts.order));
        }
        if sweeps >= opts.max_sweeps {
            return Err(CorexError::Convergence {
                what: "truncated eigensolver",
                iterations: sweeps,
                residual: residual / scale,
            });
        }
        block = ritz;
    }
}
