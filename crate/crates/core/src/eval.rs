//! ROC analysis, the replicated simulation harness and the eigengap profile.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{BaselineMethod, BaselineScores};
use crate::coreid::{
    kmeans_split, select_rank_ecv, threshold_config, threshold_er, CorePartition, EcvOptions,
    DEFAULT_EPS, DEFAULT_KMEANS_FLOOR,
};
use crate::error::{CorexError, Result};
use crate::graph::{average_density, degrees, ProbabilityMatrix};
use crate::linop::ErAssembled;
use crate::rng::{derive_seed, tag};
use crate::spectral::{config_scores, er_scores, truncated_eigs, EigenOptions, ScoreModel};
use crate::synth::{generate, SynthConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve {
    pub method: String,
    /// From `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

fn class_sizes(truth: &[bool]) -> Result<(usize, usize)> {
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(CorexError::domain("truth needs at least one core and one periphery node"));
    }
    Ok((pos, neg))
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

/// ROC curve of "score above threshold" against the truth; equal scores cross
/// the threshold together.
pub fn roc(values: &[f64], truth: &[bool], method: impl Into<String>) -> Result<RocCurve> {
    if values.len() != truth.len() {
        return Err(CorexError::domain("scores and truth differ in length"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(CorexError::domain("scores contain NaN"));
    }
    let (pos, neg) = class_sizes(truth)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let v = values[order[k]];
        while k < order.len() && values[order[k]] == v {
            if truth[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = trapezoid(&points);
    Ok(RocCurve { method: method.into(), points, auc })
}

/// `(fpr, tpr)` of a hard partition.
pub fn operating_point(partition: &CorePartition, truth: &[bool]) -> Result<(f64, f64)> {
    if partition.labels.len() != truth.len() {
        return Err(CorexError::domain("partition and truth differ in length"));
    }
    let (pos, neg) = class_sizes(truth)?;
    let tp = partition.labels.iter().zip(truth).filter(|(&l, &t)| l && t).count();
    let fp = partition.labels.iter().zip(truth).filter(|(&l, &t)| l && !t).count();
    Ok((fp as f64 / neg as f64, tp as f64 / pos as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KcorePoint {
    pub k: usize,
    pub fpr: f64,
    pub tpr: f64,
}

/// One ROC point per `k = 0..=max coreness + 1`, taking the k-core as the core.
pub fn kcore_points(coreness: &BaselineScores, truth: &[bool]) -> Result<Vec<KcorePoint>> {
    if coreness.method != BaselineMethod::Coreness {
        return Err(CorexError::domain("k-core points need coreness scores"));
    }
    if coreness.values.len() != truth.len() {
        return Err(CorexError::domain("coreness and truth differ in length"));
    }
    let (pos, neg) = class_sizes(truth)?;
    let max = coreness.values.iter().copied().fold(0.0, f64::max) as usize;
    Ok((0..=max + 1)
        .map(|k| {
            let kept = coreness.values.iter().zip(truth).filter(|(&c, _)| c >= k as f64);
            let (mut tp, mut fp) = (0, 0);
            for (_, &t) in kept {
                if t {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
            KcorePoint { k, fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 }
        })
        .collect())
}

/// A scoring method compared in experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Spectral(ScoreModel),
    Baseline(BaselineMethod),
}

impl Method {
    /// Both spectral scores followed by every baseline.
    pub fn all() -> Vec<Method> {
        let mut v = vec![Method::Spectral(ScoreModel::Er), Method::Spectral(ScoreModel::Config)];
        v.extend(BaselineMethod::ALL.iter().map(|&b| Method::Baseline(b)));
        v
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Spectral(m) => write!(f, "spectral_{m}"),
            Method::Baseline(b) => f.write_str(b.name()),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(model) = s.strip_prefix("spectral_") {
            return model.parse().map(Method::Spectral);
        }
        BaselineMethod::ALL
            .iter()
            .find(|b| b.name() == s)
            .map(|&b| Method::Baseline(b))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// How the spectral methods pick their rank in each replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    Fixed(usize),
    /// Edge cross-validation over the listed candidates.
    Ecv(Vec<usize>),
    /// The graphon's known rank, or edge cross-validation over `1..=10` when
    /// the kernel is full rank.
    Nominal,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// `synth.seed` is the master seed.
    pub synth: SynthConfig,
    pub methods: Vec<Method>,
    pub replicates: usize,
    pub rank_mode: RankMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub method: Method,
    /// `threshold` or `kmeans`.
    pub rule: &'static str,
    pub fpr: f64,
    pub tpr: f64,
    pub n_core: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateResult {
    pub seed: u64,
    pub rank_used: Option<usize>,
    /// Aligned with the configured methods.
    pub aucs: Vec<f64>,
    pub operating_points: Vec<OperatingPoint>,
    pub kcore: Vec<KcorePoint>,
    #[serde(skip)]
    curves: Vec<RocCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_auc: f64,
    pub se_auc: f64,
    /// Replicate-averaged TPR on the FPR grid `0, 0.01, ..., 1`.
    #[serde(skip)]
    pub mean_roc: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub master_seed: u64,
    pub replicates: Vec<ReplicateResult>,
    pub summary: Vec<MethodSummary>,
}

const ROC_GRID: usize = 100;

/// Linear interpolation of a ROC curve at `fpr`; vertical segments take their top.
fn tpr_at(points: &[(f64, f64)], fpr: f64) -> f64 {
    let k = points.partition_point(|p| p.0 <= fpr);
    if k == 0 {
        return points[0].1;
    }
    let (x0, y0) = points[k - 1];
    match points.get(k) {
        Some(&(x1, y1)) if x1 > x0 => y0 + (y1 - y0) * (fpr - x0) / (x1 - x0),
        _ => y0,
    }
}

fn resolve_rank(mode: &RankMode, cfg: &SynthConfig, g: &crate::graph::SparseGraph, seed: u64) -> Result<usize> {
    let ecv = |candidates: &[usize]| -> Result<usize> {
        let opts = EcvOptions { seed, ..Default::default() };
        Ok(select_rank_ecv(g, candidates, &opts)?.chosen_r)
    };
    match mode {
        RankMode::Fixed(r) => Ok(*r),
        RankMode::Ecv(c) => ecv(c),
        RankMode::Nominal => match cfg.graphon.nominal_rank() {
            Some(r) => Ok(r),
            None => ecv(&(1..=10).collect::<Vec<_>>()),
        },
    }
}

fn run_replicate(exp: &ExperimentConfig, rep: usize) -> Result<ReplicateResult> {
    let seed = derive_seed(exp.synth.seed, &[tag::REPLICATE, rep as u64]);
    let cfg = exp.synth.clone().with_seed(seed);
    let inst = generate(&cfg)?;
    let g = &inst.graph;
    let n = g.n();
    let truth = &inst.truth;

    let needs_spectral = exp.methods.iter().any(|m| matches!(m, Method::Spectral(_)));
    let (dec, rank_used) = if needs_spectral {
        let r = resolve_rank(&exp.rank_mode, &cfg, g, seed)?;
        (Some(truncated_eigs(g, &EigenOptions::new(r).seed(seed))?), Some(r))
    } else {
        (None, None)
    };
    let p_hat = average_density(g)?;

    let mut aucs = Vec::new();
    let mut curves = Vec::new();
    let mut operating_points = Vec::new();
    let mut kcore = Vec::new();
    for &method in &exp.methods {
        let values = match method {
            Method::Spectral(model) => {
                let dec = dec.as_ref().expect("decomposition computed for spectral methods");
                let scores = match model {
                    ScoreModel::Er => er_scores(dec),
                    ScoreModel::Config => config_scores(dec, &degrees(g)),
                };
                let threshold = match model {
                    ScoreModel::Er => threshold_er(&scores, p_hat, n, DEFAULT_EPS),
                    ScoreModel::Config => threshold_config(&scores, p_hat, n, DEFAULT_EPS),
                };
                let mut rules = vec![("threshold", threshold)];
                match kmeans_split(&scores.values, DEFAULT_KMEANS_FLOOR) {
                    Err(CorexError::Degenerate(_)) => {}
                    other => rules.push(("kmeans", other)),
                }
                for (rule, part) in rules {
                    let part = part?;
                    let (fpr, tpr) = operating_point(&part, truth)?;
                    operating_points.push(OperatingPoint { method, rule, fpr, tpr, n_core: part.n_core });
                }
                scores.values
            }
            Method::Baseline(b) => {
                let s = b.score(g)?;
                if b == BaselineMethod::Coreness {
                    kcore = kcore_points(&s, truth)?;
                }
                s.values
            }
        };
        let curve = roc(&values, truth, method.to_string())?;
        aucs.push(curve.auc);
        curves.push(curve);
    }
    Ok(ReplicateResult { seed, rank_used, aucs, operating_points, kcore, curves })
}

/// Runs every method on `replicates` independently generated instances.
/// Replicate seeds are derived from the master seed, so the result does not
/// depend on scheduling.
pub fn run_experiment(exp: &ExperimentConfig) -> Result<ExperimentResult> {
    exp.synth.validate()?;
    if exp.replicates == 0 {
        return Err(CorexError::domain("need at least one replicate"));
    }
    if exp.methods.is_empty() {
        return Err(CorexError::domain("no methods selected"));
    }
    let replicates: Vec<ReplicateResult> = (0..exp.replicates)
        .into_par_iter()
        .map(|rep| run_replicate(exp, rep))
        .collect::<Result<_>>()?;

    let reps = replicates.len() as f64;
    let summary = exp
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let aucs: Vec<f64> = replicates.iter().map(|r| r.aucs[k]).collect();
            let mean = aucs.iter().sum::<f64>() / reps;
            let se = if aucs.len() > 1 {
                let var = aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (reps - 1.0);
                (var / reps).sqrt()
            } else {
                0.0
            };
            let mean_roc = (0..=ROC_GRID)
                .map(|g| {
                    let x = g as f64 / ROC_GRID as f64;
                    let y = replicates.iter().map(|r| tpr_at(&r.curves[k].points, x)).sum::<f64>() / reps;
                    (x, y)
                })
                .collect();
            MethodSummary { method, mean_auc: mean, se_auc: se, mean_roc }
        })
        .collect();
    Ok(ExperimentResult { master_seed: exp.synth.seed, replicates, summary })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub n_periphery: usize,
    /// Leading four eigenvalues by magnitude.
    pub eigenvalues: [f64; 4],
    /// `|lambda_3| - |lambda_4|`.
    pub gap: f64,
    /// `gap / |lambda_1|`.
    pub normalized_gap: f64,
}

/// Third eigengap of the ER-type assembly of `core_p` as the periphery grows.
pub fn eigengap_profile(core_p: &ProbabilityMatrix, periphery_sizes: &[usize], level: f64) -> Result<Vec<GapPoint>> {
    if core_p.n() < 5 {
        return Err(CorexError::domain("eigengap profile needs a core of at least five nodes"));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(CorexError::domain(format!("periphery level {level} outside [0,1]")));
    }
    periphery_sizes
        .iter()
        .map(|&np| {
            let op = ErAssembled { core: core_p.matrix(), n_periphery: np, level };
            let dec = truncated_eigs(&op, &EigenOptions::new(4))?;
            let l = dec.eigenvalues();
            let eigenvalues = [l[0], l[1], l[2], l[3]];
            let gap = l[2].abs() - l[3].abs();
            Ok(GapPoint { n_periphery: np, eigenvalues, gap, normalized_gap: gap / l[0].abs() })
        })
        .collect()
}
