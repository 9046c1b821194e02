use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{ScoreModel, SpectralDecomposition};
use crate::error::{CorexError, Result};
use crate::graph::{DegreeVector, ProbabilityMatrix};

/// Per-node centered row norms of the (degree-corrected) probability estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoreScores {
    pub values: Vec<f64>,
    pub model: ScoreModel,
    /// `None` when computed from a true probability matrix.
    pub rank_used: Option<usize>,
    /// Zero-degree nodes left out of degree-corrected scoring; their score is 0.
    pub excluded: Vec<usize>,
}

impl CoreScores {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `sqrt(U_i G U_i^T)` for every row `i` in `rows`; negative rounding is clamped.
fn quadratic_row_norms(u: &DMatrix<f64>, gram: &DMatrix<f64>, rows: &[usize]) -> Vec<f64> {
    let ug = u * gram;
    rows.iter()
        .map(|&i| {
            let q: f64 = ug.row(i).iter().zip(u.row(i).iter()).map(|(a, b)| a * b).sum();
            q.max(0.0).sqrt()
        })
        .collect()
}

/// ER-type scores `S_i = |(U L U^T H)_{i,*}|` through the `r x r` Gram matrix
/// `L (I - u u^T) L` with `u = U^T 1 / sqrt(n)`.
pub fn er_scores(dec: &SpectralDecomposition) -> CoreScores {
    let u = dec.eigenvectors();
    let n = u.nrows();
    let r = dec.rank();
    let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(dec.eigenvalues()));
    let ones_proj = u.row_sum().transpose() / (n as f64).sqrt();
    let centering = DMatrix::identity(r, r) - &ones_proj * ones_proj.transpose();
    let gram = &lambda * centering * &lambda;
    let rows: Vec<usize> = (0..n).collect();
    CoreScores {
        values: quadratic_row_norms(u, &gram, &rows),
        model: ScoreModel::Er,
        rank_used: Some(r),
        excluded: Vec::new(),
    }
}

/// Configuration-type scores `S'_i = |(U L U^T D^-1 H)_{i,*}|`.
///
/// Nodes with zero degree are classified periphery up front: they get score
/// 0, are listed in `excluded`, and their columns are dropped from the
/// degree correction and the centering.
pub fn config_scores(dec: &SpectralDecomposition, deg: &DegreeVector) -> CoreScores {
    let u = dec.eigenvectors();
    let n = u.nrows();
    assert_eq!(deg.len(), n, "degree vector length must match the decomposition");
    let r = dec.rank();
    let d = deg.values();
    let (included, excluded): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| d[i] > 0.0);

    let mut values = vec![0.0; n];
    if !included.is_empty() {
        let mut v = DMatrix::zeros(included.len(), r);
        for (row, &i) in included.iter().enumerate() {
            for k in 0..r {
                v[(row, k)] = u[(i, k)] / d[i];
            }
        }
        let vsum = v.row_sum().transpose();
        let inner = v.tr_mul(&v) - &vsum * vsum.transpose() / included.len() as f64;
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(dec.eigenvalues()));
        let gram = &lambda * inner * &lambda;
        for (&i, s) in included.iter().zip(quadratic_row_norms(u, &gram, &included)) {
            values[i] = s;
        }
    }
    CoreScores {
        values,
        model: ScoreModel::Config,
        rank_used: Some(r),
        excluded,
    }
}

fn centered_row_norms(p: &ProbabilityMatrix, col_scale: &[f64]) -> Vec<f64> {
    let n = p.n();
    let m = p.matrix();
    (0..n)
        .into_par_iter()
        .map(|i| {
            // row i == column i by symmetry
            let row = m.column(i);
            let scaled = || row.iter().zip(col_scale).map(|(x, s)| x * s);
            let mean = scaled().sum::<f64>() / n as f64;
            scaled().map(|x| (x - mean) * (x - mean)).sum::<f64>().sqrt()
        })
        .collect()
}

/// Exact scores from a known probability matrix. Under `Config` the column
/// correction uses the expected degrees `sum_j P_ij`.
pub fn scores_from_truth(p: &ProbabilityMatrix, model: ScoreModel) -> Result<CoreScores> {
    match model {
        ScoreModel::Er => Ok(CoreScores {
            values: centered_row_norms(p, &vec![1.0; p.n()]),
            model,
            rank_used: None,
            excluded: Vec::new(),
        }),
        ScoreModel::Config => scores_from_truth_with_degrees(p, &p.expected_degrees()),
    }
}

/// Exact configuration-type scores `|(P D^-1 H)_{i,*}|` with a caller-supplied
/// degree vector (e.g. the model parameters of a configuration-type periphery).
pub fn scores_from_truth_with_degrees(p: &ProbabilityMatrix, deg: &DegreeVector) -> Result<CoreScores> {
    if deg.len() != p.n() {
        return Err(CorexError::domain("degree vector length must equal n"));
    }
    if let Some(i) = deg.values().iter().position(|&d| d <= 0.0) {
        return Err(CorexError::domain(format!("expected degree of node {i} is zero")));
    }
    let inv: Vec<f64> = deg.values().iter().map(|d| 1.0 / d).collect();
    Ok(CoreScores {
        values: centered_row_norms(p, &inv),
        model: ScoreModel::Config,
        rank_used: None,
        excluded: Vec::new(),
    })
}
