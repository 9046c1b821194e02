//! Turning scores into a core/periphery partition.

mod ecv;

use serde::{Deserialize, Serialize};

pub use ecv::{select_rank_ecv, EcvOptions, RankSelection};

use crate::error::{CorexError, Result};
use crate::spectral::{CoreScores, ScoreModel};

/// Default exponent slack in both threshold rules.
pub const DEFAULT_EPS: f64 = 0.01;
/// Scores at or below this are clamped before taking logs in [`kmeans_split`].
pub const DEFAULT_KMEANS_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    TopK,
    Threshold,
    Kmeans,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorePartition {
    pub labels: Vec<bool>,
    pub n_core: usize,
    pub method: SelectionMethod,
    /// Score cutoff actually applied (`core = score > cutoff`); `None` for top-k.
    pub cutoff: Option<f64>,
}

impl CorePartition {
    fn from_cutoff(values: &[f64], cutoff: f64, method: SelectionMethod) -> Self {
        let labels: Vec<bool> = values.iter().map(|&s| s > cutoff).collect();
        CorePartition {
            n_core: labels.iter().filter(|&&c| c).count(),
            labels,
            method,
            cutoff: Some(cutoff),
        }
    }

    pub fn core_nodes(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Labels the `n_core` highest-scoring nodes as core; equal scores at the
/// boundary go to the smaller node index.
pub fn identify_top_k(values: &[f64], n_core: usize) -> Result<CorePartition> {
    let n = values.len();
    if n_core > n {
        return Err(CorexError::domain(format!("core size {n_core} exceeds n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut labels = vec![false; n];
    for &i in &order[..n_core] {
        labels[i] = true;
    }
    Ok(CorePartition {
        labels,
        n_core,
        method: SelectionMethod::TopK,
        cutoff: None,
    })
}

fn check_threshold_inputs(p_hat: f64, n: usize, eps: f64) -> Result<()> {
    if !(p_hat > 0.0 && p_hat <= 1.0) {
        return Err(CorexError::domain(format!("edge density {p_hat} must lie in (0, 1]")));
    }
    if n < 2 {
        return Err(CorexError::domain("threshold needs n >= 2"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CorexError::domain(format!("eps {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// `sqrt(p^(1-eps) ln n)`.
pub fn er_cutoff(p_hat: f64, n: usize, eps: f64) -> Result<f64> {
    check_threshold_inputs(p_hat, n, eps)?;
    Ok((p_hat.powf(1.0 - eps) * (n as f64).ln()).sqrt())
}

/// `sqrt(ln n) / (n sqrt(p^(1+eps)))`.
pub fn config_cutoff(p_hat: f64, n: usize, eps: f64) -> Result<f64> {
    check_threshold_inputs(p_hat, n, eps)?;
    let nf = n as f64;
    Ok(nf.ln().sqrt() / (nf * p_hat.powf(1.0 + eps).sqrt()))
}

fn expect_model(scores: &CoreScores, model: ScoreModel) -> Result<()> {
    if scores.model != model {
        return Err(CorexError::domain(format!(
            "threshold for {model} scores applied to {} scores",
            scores.model
        )));
    }
    Ok(())
}

/// Core = nodes whose ER-type score strictly exceeds [`er_cutoff`].
pub fn threshold_er(scores: &CoreScores, p_hat: f64, n: usize, eps: f64) -> Result<CorePartition> {
    expect_model(scores, ScoreModel::Er)?;
    let cutoff = er_cutoff(p_hat, n, eps)?;
    Ok(CorePartition::from_cutoff(&scores.values, cutoff, SelectionMethod::Threshold))
}

/// Core = nodes whose configuration-type score strictly exceeds [`config_cutoff`].
pub fn threshold_config(scores: &CoreScores, p_hat: f64, n: usize, eps: f64) -> Result<CorePartition> {
    expect_model(scores, ScoreModel::Config)?;
    let cutoff = config_cutoff(p_hat, n, eps)?;
    Ok(CorePartition::from_cutoff(&scores.values, cutoff, SelectionMethod::Threshold))
}

/// Two-cluster k-means on `ln(max(score, floor))`, solved exactly by scanning
/// every split of the sorted values. The upper cluster is the core; the
/// reported cutoff is the geometric midpoint of the gap between clusters.
pub fn kmeans_split(values: &[f64], floor: f64) -> Result<CorePartition> {
    let n = values.len();
    if n < 2 {
        return Err(CorexError::domain("k-means split needs at least two scores"));
    }
    if !(floor > 0.0) {
        return Err(CorexError::domain("k-means floor must be positive"));
    }
    let mut logs: Vec<f64> = values.iter().map(|&v| v.max(floor).ln()).collect();
    logs.sort_by(f64::total_cmp);

    let total: f64 = logs.iter().sum();
    let mut prefix = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n {
        prefix += logs[k - 1];
        if logs[k - 1] == logs[k] {
            continue;
        }
        let hi = total - prefix;
        // maximizing this is minimizing the within-cluster sum of squares
        let between = prefix * prefix / k as f64 + hi * hi / (n - k) as f64;
        if best.map_or(true, |(_, b)| between > b) {
            best = Some((k, between));
        }
    }
    let (k, _) = best.ok_or_else(|| CorexError::Degenerate("all scores are equal after clamping".into()))?;
    let cutoff = ((logs[k - 1] + logs[k]) / 2.0).exp();
    Ok(CorePartition::from_cutoff(values, cutoff, SelectionMethod::Kmeans))
}
