//! Truncated eigendecomposition of the adjacency matrix and the centered
//! row-norm core scores computed from it.

mod diagnostics;
mod eigs;
mod scores;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use diagnostics::{diagnostics, DiagnosticReport};
pub use eigs::{truncated_eigs, EigenOptions};
pub use scores::{
    config_scores, er_scores, scores_from_truth, scores_from_truth_with_degrees, CoreScores,
};

use crate::error::Result;
use crate::graph::SparseGraph;

/// Which eigenpairs count as "top": largest `|lambda|` (truncated SVD of a
/// symmetric matrix) or largest signed `lambda`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenOrder {
    #[default]
    Magnitude,
    Signed,
}

/// Periphery model a score vector was computed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreModel {
    Er,
    Config,
}

impl std::str::FromStr for ScoreModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "er" => Ok(ScoreModel::Er),
            "config" => Ok(ScoreModel::Config),
            other => Err(format!("unknown model `{other}` (expected er|config)")),
        }
    }
}

impl std::fmt::Display for ScoreModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreModel::Er => "er",
            ScoreModel::Config => "config",
        })
    }
}

/// Top-`r` eigenpairs `(Lambda, U)`; the low-rank estimate is `U Lambda U^T`
/// and is never formed densely.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    order: EigenOrder,
}

impl SpectralDecomposition {
    /// `eigenvectors` must be `n x r` with orthonormal columns.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>, order: EigenOrder) -> Self {
        assert_eq!(eigenvalues.len(), eigenvectors.ncols());
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
            order,
        }
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn source_n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn order(&self) -> EigenOrder {
        self.order
    }

    /// Leading `r` pairs of this decomposition.
    pub fn truncate(&self, r: usize) -> SpectralDecomposition {
        let r = r.min(self.rank());
        SpectralDecomposition {
            eigenvalues: self.eigenvalues[..r].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, r).into_owned(),
            order: self.order,
        }
    }

    /// Entry `(i, j)` of the low-rank estimate.
    pub fn estimate_entry(&self, i: usize, j: usize) -> f64 {
        let u = &self.eigenvectors;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, l)| l * u[(i, k)] * u[(j, k)])
            .sum()
    }
}

/// Rank-`r` decomposition of a graph's adjacency with default tolerances.
pub fn decompose(g: &SparseGraph, r: usize, seed: u64) -> Result<SpectralDecomposition> {
    truncated_eigs(g, &EigenOptions::new(r).seed(seed))
}
