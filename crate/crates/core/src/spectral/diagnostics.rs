use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{scores_from_truth, ScoreModel};
use crate::graph::ProbabilityMatrix;

/// Signal-strength summary of a known probability matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub p_star: f64,
    /// Smallest ER-type truth score over the core; absent for an empty core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_n: Option<f64>,
    /// Smallest configuration-type truth score over the core; absent for an
    /// empty core or when some expected degree is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_prime_n: Option<f64>,
    /// All eigenvalues, by decreasing magnitude.
    pub eigenvalues: Vec<f64>,
    /// `|lambda_r| - |lambda_{r+1}|`; absent unless `1 <= r < n`.
    pub gap_r: Option<f64>,
}

fn min_over(values: &[f64], core: &[bool]) -> Option<f64> {
    values
        .iter()
        .zip(core)
        .filter(|(_, &c)| c)
        .map(|(&v, _)| v)
        .min_by(f64::total_cmp)
}

/// Dense diagnostics. `core` labels are needed for `h(n)` and `h'(n)`.
pub fn diagnostics(p: &ProbabilityMatrix, r: usize, core: Option<&[bool]>) -> DiagnosticReport {
    let n = p.n();
    let mut eigenvalues: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(p.matrix().clone()).eigenvalues.as_slice().to_vec()
    };
    eigenvalues.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let gap_r = (r >= 1 && r < n).then(|| eigenvalues[r - 1].abs() - eigenvalues[r].abs());

    let (h_n, h_prime_n) = match core {
        Some(labels) if labels.iter().any(|&c| c) => {
            assert_eq!(labels.len(), n, "core labels must cover every node");
            let er = scores_from_truth(p, ScoreModel::Er).expect("ER truth scores are total");
            let h = min_over(&er.values, labels);
            let hp = scores_from_truth(p, ScoreModel::Config)
                .ok()
                .and_then(|s| min_over(&s.values, labels));
            (h, hp)
        }
        _ => (None, None),
    };

    DiagnosticReport {
        p_star: if n == 0 { 0.0 } else { p.max_entry() },
        h_n,
        h_prime_n,
        eigenvalues,
        gap_r,
    }
}
