use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CorexError, Result};
use crate::graph::SparseGraph;
use crate::linop::WeightedSparse;
use crate::rng::{derive_seed, stream_rng, tag};
use crate::spectral::{truncated_eigs, EigenOptions, SpectralDecomposition};

#[derive(Clone, Copy, Debug)]
pub struct EcvOptions {
    pub folds: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for EcvOptions {
    fn default() -> Self {
        EcvOptions { folds: 3, holdout_fraction: 0.1, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankSelection {
    pub chosen_r: usize,
    /// Sorted, deduplicated candidate ranks.
    pub candidates: Vec<usize>,
    /// Fold-averaged held-out loss, aligned with `candidates`.
    pub candidate_losses: Vec<f64>,
    pub folds: usize,
    pub holdout_fraction: f64,
}

struct Fold {
    train: WeightedSparse,
    /// Held-out pairs `(i, j, a_ij)`.
    held: Vec<(usize, usize, f64)>,
}

fn split_fold(g: &SparseGraph, hf: f64, key: u64) -> Fold {
    let n = g.n();
    let rows: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(key, i as u64);
            let nbrs = g.neighbors(i);
            let mut cursor = nbrs.partition_point(|&j| j <= i);
            let mut train = Vec::new();
            let mut held = Vec::new();
            for j in i + 1..n {
                let edge = cursor < nbrs.len() && nbrs[cursor] == j;
                if edge {
                    cursor += 1;
                }
                if rng.gen::<f64>() < hf {
                    held.push((i, j, if edge { 1.0 } else { 0.0 }));
                } else if edge {
                    train.push((i, j, 1.0 / (1.0 - hf)));
                }
            }
            (train, held)
        })
        .collect();
    let mut train = Vec::new();
    let mut held = Vec::new();
    for (t, h) in rows {
        train.extend(t);
        held.extend(h);
    }
    Fold { train: WeightedSparse::from_pairs(n, &train), held }
}

/// Sum of squared held-out errors for each prefix rank in `ranks` (ascending).
fn prefix_losses(dec: &SpectralDecomposition, held: &[(usize, usize, f64)], ranks: &[usize]) -> Vec<f64> {
    let lambda = dec.eigenvalues();
    let u = dec.eigenvectors();
    let mut sse = vec![0.0; ranks.len()];
    for &(i, j, a) in held {
        let mut est = 0.0;
        let mut k = 0;
        for (slot, &r) in ranks.iter().enumerate() {
            while k < r {
                est += lambda[k] * u[(i, k)] * u[(j, k)];
                k += 1;
            }
            let e = est.clamp(0.0, 1.0) - a;
            sse[slot] += e * e;
        }
    }
    sse
}

/// Edge cross-validation over candidate ranks. Each fold masks every
/// unordered pair independently with probability `holdout_fraction`, fits a
/// single decomposition at the largest candidate and scores every candidate
/// from its leading eigenpairs.
pub fn select_rank_ecv(g: &SparseGraph, candidates: &[usize], opts: &EcvOptions) -> Result<RankSelection> {
    let n = g.n();
    let mut ranks = candidates.to_vec();
    ranks.sort_unstable();
    ranks.dedup();
    let r_max = *ranks.last().ok_or_else(|| CorexError::domain("no candidate ranks"))?;
    if ranks[0] == 0 || r_max >= n {
        return Err(CorexError::domain(format!("candidate ranks must lie in 1..{n}")));
    }
    let hf = opts.holdout_fraction;
    if !(hf > 0.0 && hf < 1.0) {
        return Err(CorexError::domain(format!("holdout fraction {hf} must lie in (0, 1)")));
    }
    if opts.folds == 0 {
        return Err(CorexError::domain("need at least one fold"));
    }

    let per_fold: Vec<(Vec<f64>, usize)> = (0..opts.folds)
        .into_par_iter()
        .map(|f| {
            let fold = split_fold(g, hf, derive_seed(opts.seed, &[tag::ECV_MASK, f as u64]));
            if fold.held.is_empty() {
                return Err(CorexError::Degenerate(format!("fold {f} holds out no pairs")));
            }
            let eig_seed = derive_seed(opts.seed, &[tag::ECV_EIGEN, f as u64]);
            let dec = truncated_eigs(&fold.train, &EigenOptions::new(r_max).seed(eig_seed))?;
            Ok((prefix_losses(&dec, &fold.held, &ranks), fold.held.len()))
        })
        .collect::<Result<_>>()?;

    let mut losses = vec![0.0; ranks.len()];
    for (sse, count) in &per_fold {
        for (l, s) in losses.iter_mut().zip(sse) {
            *l += s / *count as f64;
        }
    }
    for l in &mut losses {
        *l /= opts.folds as f64;
    }
    let mut best = 0;
    for (k, &l) in losses.iter().enumerate() {
        if l < losses[best] {
            best = k;
        }
    }
    Ok(RankSelection {
        chosen_r: ranks[best],
        candidates: ranks,
        candidate_losses: losses,
        folds: opts.folds,
        holdout_fraction: hf,
    })
}
