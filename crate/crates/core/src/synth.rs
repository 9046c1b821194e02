//! Synthetic core-periphery probability matrices: a graphon core plus an
//! ER-type or configuration-type periphery, rescaled to a target density and
//! core/periphery degree ratio.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CorexError, Result};
use crate::graph::{sample_adjacency, ProbabilityMatrix, SparseGraph};
use crate::rng::{derive_seed, stream_rng, tag};
use crate::spectral::ScoreModel;

/// Largest share of unordered pairs that rescaling may clip to 1.
pub const MAX_CLIP_FRACTION: f64 = 0.2;

type GraphonFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum GraphonSpec {
    /// Six diagonal blocks at `k/7`, `0.3/7` elsewhere.
    Blocks,
    /// `sin(5 pi (mu + nu - 1) + 1) / 2 + 0.5`.
    Sinusoid,
    /// `1 / (1 + exp(15 (0.8 |mu - nu|)^(4/5) - 0.1))`.
    Smooth,
    Constant(f64),
    Custom(Arc<GraphonFn>),
}

impl GraphonSpec {
    /// Rank of the kernel, when finite and known.
    pub fn nominal_rank(&self) -> Option<usize> {
        match self {
            GraphonSpec::Blocks => Some(6),
            GraphonSpec::Sinusoid => Some(3),
            GraphonSpec::Constant(_) => Some(1),
            GraphonSpec::Smooth | GraphonSpec::Custom(_) => None,
        }
    }
}

impl fmt::Display for GraphonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphonSpec::Blocks => f.write_str("1"),
            GraphonSpec::Sinusoid => f.write_str("2"),
            GraphonSpec::Smooth => f.write_str("3"),
            GraphonSpec::Constant(p) => write!(f, "const:{p}"),
            GraphonSpec::Custom(_) => f.write_str("custom"),
        }
    }
}

impl fmt::Debug for GraphonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphonSpec({self})")
    }
}

impl FromStr for GraphonSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(GraphonSpec::Blocks),
            "2" => Ok(GraphonSpec::Sinusoid),
            "3" => Ok(GraphonSpec::Smooth),
            _ => {
                let p: f64 = s
                    .strip_prefix("const:")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| format!("unknown graphon `{s}` (expected 1|2|3|const:<p>)"))?;
                if (0.0..=1.0).contains(&p) {
                    Ok(GraphonSpec::Constant(p))
                } else {
                    Err(format!("constant graphon value {p} outside [0,1]"))
                }
            }
        }
    }
}

fn g1(mu: f64, nu: f64) -> f64 {
    let k = (6.0 * mu).floor() + 1.0;
    let inside = |x: f64| (k - 1.0) / 6.0 < x && x < k / 6.0;
    if inside(mu) && inside(nu) {
        k / 7.0
    } else {
        0.3 / 7.0
    }
}

pub fn graphon_value(spec: &GraphonSpec, mu: f64, nu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&nu) {
        return Err(CorexError::domain(format!("graphon arguments ({mu}, {nu}) outside [0,1]")));
    }
    let v = match spec {
        GraphonSpec::Blocks => g1(mu, nu),
        GraphonSpec::Sinusoid => (5.0 * std::f64::consts::PI * (mu + nu - 1.0) + 1.0).sin() / 2.0 + 0.5,
        GraphonSpec::Smooth => 1.0 / (1.0 + (15.0 * (0.8 * (mu - nu).abs()).powf(0.8) - 0.1).exp()),
        GraphonSpec::Constant(p) => *p,
        GraphonSpec::Custom(f) => f(mu, nu),
    };
    if !(0.0..=1.0).contains(&v) {
        return Err(CorexError::domain(format!("graphon value {v} at ({mu}, {nu}) outside [0,1]")));
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct CoreSample {
    pub p: ProbabilityMatrix,
    /// Latent positions `xi_i ~ U[0,1]`.
    pub latent: Vec<f64>,
}

/// `P_ij = g(xi_i, xi_j)` with i.i.d. uniform latent positions.
pub fn graphon_core(spec: &GraphonSpec, n_core: usize, seed: u64) -> Result<CoreSample> {
    if n_core < 2 {
        return Err(CorexError::domain("a graphon core needs at least two nodes"));
    }
    let mut rng = stream_rng(derive_seed(seed, &[tag::LATENT]), 0);
    let latent: Vec<f64> = (0..n_core).map(|_| rng.gen::<f64>()).collect();
    let mut m = DMatrix::zeros(n_core, n_core);
    m.as_mut_slice()
        .par_chunks_mut(n_core)
        .enumerate()
        .try_for_each(|(j, col)| -> Result<()> {
            for (i, v) in col.iter_mut().enumerate() {
                if i != j {
                    // lower index first, so the matrix is bitwise symmetric
                    let (a, b) = (i.min(j), i.max(j));
                    *v = graphon_value(spec, latent[a], latent[b])?;
                }
            }
            Ok(())
        })?;
    Ok(CoreSample { p: ProbabilityMatrix::from_trusted(m), latent })
}

/// Core block followed by `n_periphery` nodes whose rows are the constant
/// `level` off the diagonal.
pub fn assemble_er(core_p: &ProbabilityMatrix, n_periphery: usize, level: f64) -> Result<ProbabilityMatrix> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CorexError::domain(format!("periphery level {level} must lie in (0,1)")));
    }
    let nc = core_p.n();
    let n = nc + n_periphery;
    let core = core_p.matrix();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if i < nc && j < nc {
            core[(i, j)]
        } else {
            level
        }
    });
    Ok(ProbabilityMatrix::from_trusted(m))
}

#[derive(Clone, Debug)]
pub struct ConfigAssembly {
    pub p: ProbabilityMatrix,
    /// Core row sums followed by the periphery weights.
    pub theta: Vec<f64>,
    /// Unordered pairs whose product-form value exceeded 1.
    pub clipped: usize,
}

fn draw_periphery_theta(core_p: &ProbabilityMatrix, n_periphery: usize, seed: u64) -> Result<Vec<f64>> {
    let theta_core = core_p.expected_degrees();
    let lo = 0.5 * theta_core.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = 1.5 * theta_core.values().iter().copied().fold(0.0, f64::max);
    if !(hi > 0.0) {
        return Err(CorexError::domain("configuration periphery needs a nonzero core"));
    }
    let key = derive_seed(seed, &[tag::THETA]);
    Ok((0..n_periphery)
        .map(|k| {
            let u: f64 = stream_rng(key, k as u64).gen();
            lo + (hi - lo) * u
        })
        .collect())
}

/// Product-form assembly before clipping; entries may exceed 1.
fn config_unclipped(core_p: &ProbabilityMatrix, theta_p: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let nc = core_p.n();
    let mut theta = core_p.expected_degrees().values().to_vec();
    let total: f64 = theta.iter().sum();
    if !(total > 0.0) {
        return Err(CorexError::domain("configuration periphery needs a nonzero core"));
    }
    if theta_p.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(CorexError::domain("periphery weights must be finite and nonnegative"));
    }
    theta.extend_from_slice(theta_p);
    let n = theta.len();
    let core = core_p.matrix();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if i < nc && j < nc {
            core[(i, j)]
        } else {
            // same operand order on both triangles keeps the matrix symmetric
            theta[i.min(j)] * theta[i.max(j)] / total
        }
    });
    Ok((m, theta))
}

/// Configuration-type periphery with weights drawn uniformly from
/// `[0.5 min theta_core, 1.5 max theta_core]`.
pub fn assemble_config(core_p: &ProbabilityMatrix, n_periphery: usize, seed: u64) -> Result<ConfigAssembly> {
    let theta_p = draw_periphery_theta(core_p, n_periphery, seed)?;
    assemble_config_with_theta(core_p, &theta_p)
}

/// Configuration-type assembly with caller-supplied periphery weights:
/// `P_ij = theta_i theta_j / sum(theta_core)` whenever a periphery node is
/// involved, clipped to 1.
pub fn assemble_config_with_theta(core_p: &ProbabilityMatrix, theta_p: &[f64]) -> Result<ConfigAssembly> {
    let (mut m, theta) = config_unclipped(core_p, theta_p)?;
    let n = m.nrows();
    let clipped = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).filter(|&(i, j)| m[(i, j)] > 1.0).count();
    m.apply(|v| *v = v.min(1.0));
    Ok(ConfigAssembly { p: ProbabilityMatrix::from_trusted(m), theta, clipped })
}

/// Exact check that every periphery row (index `>= n_core`) is constant off the diagonal.
pub fn is_er_type(p: &ProbabilityMatrix, n_core: usize) -> bool {
    let n = p.n();
    (n_core..n).all(|i| {
        let mut vals = (0..n).filter(|&j| j != i).map(|j| p.get(i, j));
        match vals.next() {
            None => true,
            Some(first) => vals.all(|v| v == first),
        }
    })
}

/// Largest `|P_ij - d_i d_j / sum(d)|` over periphery rows, with the model
/// degrees `d_i = theta_i sum(theta) / sum(theta_core)`.
pub fn config_residual(p: &ProbabilityMatrix, theta: &[f64], n_core: usize) -> f64 {
    let n = p.n();
    assert_eq!(theta.len(), n);
    let t_core: f64 = theta[..n_core].iter().sum();
    let t_all: f64 = theta.iter().sum();
    let d: Vec<f64> = theta.iter().map(|t| t * t_all / t_core).collect();
    let d_sum: f64 = d.iter().sum();
    let mut worst = 0.0f64;
    for i in n_core..n {
        for j in 0..n {
            if j != i {
                worst = worst.max((p.get(i, j) - d[i] * d[j] / d_sum).abs());
            }
        }
    }
    worst
}

/// Multipliers applied by [`rescale`]: core-core entries by `c_core`,
/// core-periphery by `c_cross`, periphery-periphery by `c_peri`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RescaleReport {
    pub c_core: f64,
    pub c_cross: f64,
    pub c_peri: f64,
    pub clipped: usize,
    pub clip_fraction: f64,
    pub realized_density: f64,
    pub realized_ratio: Option<f64>,
}

/// Values of one block (unordered pairs), sorted, for clipped sums.
struct Block {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
}

impl Block {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in &values {
            acc += v;
            prefix.push(acc);
        }
        Block { sorted: values, prefix }
    }

    /// `sum min(1, s v)` over the block.
    fn sum(&self, s: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| s * v < 1.0);
        s * self.prefix[k] + (self.sorted.len() - k) as f64
    }

    fn clipped(&self, s: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| s * v <= 1.0)
    }
}

/// Bisection on a monotone function over the log scale; returns the point
/// where `f` crosses zero given `f(lo) < 0 < f(hi)` (or the reverse for
/// `decreasing`).
fn log_bisect(mut lo: f64, mut hi: f64, decreasing: bool, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = (f(mid.exp()) < 0.0) != decreasing;
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Rescales an assembled matrix so its mean off-diagonal entry is
/// `target_density` and mean core expected degree / mean periphery expected
/// degree is `degree_ratio`. Core-core entries scale by `a`, core-periphery
/// by `a t`, periphery-periphery by `a t` (ER) or `a t^2` (config), which
/// keeps periphery rows in their model class. Entries above 1 are clipped.
pub fn rescale(
    p: &ProbabilityMatrix,
    n_core: usize,
    periphery: ScoreModel,
    target_density: f64,
    degree_ratio: f64,
) -> Result<(ProbabilityMatrix, RescaleReport)> {
    rescale_matrix(p.matrix(), n_core, periphery, target_density, degree_ratio)
}

/// [`rescale`] on a symmetric nonnegative matrix whose entries may exceed 1.
fn rescale_matrix(
    m: &DMatrix<f64>,
    n_core: usize,
    periphery: ScoreModel,
    target_density: f64,
    degree_ratio: f64,
) -> Result<(ProbabilityMatrix, RescaleReport)> {
    let n = m.nrows();
    if n_core == 0 || n_core > n {
        return Err(CorexError::domain("core size must lie in 1..=n"));
    }
    if !(target_density > 0.0 && target_density < 1.0) {
        return Err(CorexError::domain(format!("target density {target_density} must lie in (0,1)")));
    }
    if !(degree_ratio > 0.0 && degree_ratio.is_finite()) {
        return Err(CorexError::domain(format!("degree ratio {degree_ratio} must be positive")));
    }
    if n < 2 {
        return Err(CorexError::domain("rescaling needs n >= 2"));
    }
    let np = n - n_core;
    let (mut cc, mut cp, mut pp) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..n {
        for i in 0..j {
            let v = m[(i, j)];
            match (i < n_core, j < n_core) {
                (true, true) => cc.push(v),
                (true, false) => cp.push(v),
                _ => pp.push(v),
            }
        }
    }
    let (cc, cp, pp) = (Block::new(cc), Block::new(cp), Block::new(pp));
    let pairs = (n * (n - 1) / 2) as f64;
    let power = match periphery {
        ScoreModel::Er => 1,
        ScoreModel::Config => 2,
    };
    let scales = |a: f64, t: f64| (a, a * t, a * t.powi(power));
    let density = |a: f64, t: f64| {
        let (s1, s2, s3) = scales(a, t);
        (cc.sum(s1) + cp.sum(s2) + pp.sum(s3)) / pairs
    };
    if density(1e300, 1.0) < target_density {
        return Err(CorexError::Degenerate("too few nonzero entries to reach the target density".into()));
    }
    let solve_a = |t: f64| log_bisect(-700.0, 700.0, false, |a| density(a, t) - target_density);
    let ratio = |t: f64| {
        let a = solve_a(t);
        let (s1, s2, s3) = scales(a, t);
        let core = 2.0 * cc.sum(s1) + cp.sum(s2);
        let peri = cp.sum(s2) + 2.0 * pp.sum(s3);
        (core / n_core as f64) / (peri / np as f64)
    };

    let t = if np == 0 {
        1.0
    } else {
        let (lo, hi) = (-40.0f64, 40.0f64);
        if !(ratio(lo.exp()) > degree_ratio && ratio(hi.exp()) < degree_ratio) {
            return Err(CorexError::Degenerate(format!(
                "degree ratio {degree_ratio} is unreachable for this matrix"
            )));
        }
        log_bisect(lo, hi, true, |t| ratio(t) - degree_ratio)
    };
    let a = solve_a(t);
    let (s1, s2, s3) = scales(a, t);
    let clipped = cc.clipped(s1) + cp.clipped(s2) + pp.clipped(s3);
    let clip_fraction = clipped as f64 / pairs;
    if clip_fraction > MAX_CLIP_FRACTION {
        return Err(CorexError::Infeasible { clip_fraction });
    }

    let out = DMatrix::from_fn(n, n, |i, j| {
        let s = match (i < n_core, j < n_core) {
            (true, true) => s1,
            (false, false) => s3,
            _ => s2,
        };
        (s * m[(i, j)]).min(1.0)
    });
    let out = ProbabilityMatrix::from_trusted(out);
    let deg = out.expected_degrees();
    let realized_ratio = (np > 0).then(|| {
        let core: f64 = deg.values()[..n_core].iter().sum::<f64>() / n_core as f64;
        let peri: f64 = deg.values()[n_core..].iter().sum::<f64>() / np as f64;
        core / peri
    });
    let report = RescaleReport {
        c_core: s1,
        c_cross: s2,
        c_peri: s3,
        clipped,
        clip_fraction,
        realized_density: out.mean_density(),
        realized_ratio,
    };
    Ok((out, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizePreset {
    Balanced,
    SmallCore,
    LargeCore,
}

impl SizePreset {
    /// `(n_core, n_periphery)`.
    pub fn sizes(self) -> (usize, usize) {
        match self {
            SizePreset::Balanced => (1000, 1000),
            SizePreset::SmallCore => (700, 1300),
            SizePreset::LargeCore => (1300, 700),
        }
    }
}

impl FromStr for SizePreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "balanced" => Ok(SizePreset::Balanced),
            "small-core" => Ok(SizePreset::SmallCore),
            "large-core" => Ok(SizePreset::LargeCore),
            _ => Err(format!("unknown preset `{s}` (expected balanced|small-core|large-core)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub graphon: GraphonSpec,
    pub n_core: usize,
    pub n_periphery: usize,
    pub periphery: ScoreModel,
    pub target_density: f64,
    pub degree_ratio: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(graphon: GraphonSpec, preset: SizePreset, periphery: ScoreModel, degree_ratio: f64) -> Self {
        let (n_core, n_periphery) = preset.sizes();
        SynthConfig {
            graphon,
            n_core,
            n_periphery,
            periphery,
            target_density: 0.02,
            degree_ratio,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n(&self) -> usize {
        self.n_core + self.n_periphery
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_core < 2 {
            return Err(CorexError::domain("n_core must be at least 2"));
        }
        if !(self.target_density > 0.0 && self.target_density < 1.0) {
            return Err(CorexError::domain("target density must lie in (0,1)"));
        }
        if !(self.degree_ratio > 0.0 && self.degree_ratio.is_finite()) {
            return Err(CorexError::domain("degree ratio must be positive"));
        }
        Ok(())
    }
}

/// Ground truth for one configuration: the rescaled matrix and its provenance.
#[derive(Clone, Debug)]
pub struct TruthModel {
    pub p: ProbabilityMatrix,
    pub latent: Vec<f64>,
    /// Rescaled configuration weights; `None` for an ER-type periphery.
    pub theta: Option<Vec<f64>>,
    pub rescale: RescaleReport,
}

impl TruthModel {
    /// Model degrees `theta_i sum(theta) / sum(theta_core)` of a configuration-type truth.
    pub fn model_degrees(&self, n_core: usize) -> Option<Vec<f64>> {
        let theta = self.theta.as_ref()?;
        let t_core: f64 = theta[..n_core].iter().sum();
        let t_all: f64 = theta.iter().sum();
        Some(theta.iter().map(|t| t * t_all / t_core).collect())
    }
}

/// Builds the probability matrix for `cfg` (no edges sampled).
pub fn truth_model(cfg: &SynthConfig) -> Result<TruthModel> {
    cfg.validate()?;
    let core = graphon_core(&cfg.graphon, cfg.n_core, cfg.seed)?;
    let (assembled, theta) = match cfg.periphery {
        ScoreModel::Er => {
            // starting level is arbitrary; rescaling sets the final one
            let level = core.p.mean_density().clamp(1e-6, 0.5);
            (assemble_er(&core.p, cfg.n_periphery, level)?.into_matrix(), None)
        }
        ScoreModel::Config => {
            // clipping is deferred to after rescaling, which usually removes the need
            let theta_p = draw_periphery_theta(&core.p, cfg.n_periphery, cfg.seed)?;
            let (m, theta) = config_unclipped(&core.p, &theta_p)?;
            (m, Some(theta))
        }
    };
    let (p, report) = rescale_matrix(&assembled, cfg.n_core, cfg.periphery, cfg.target_density, cfg.degree_ratio)?;
    let theta = theta.map(|th| {
        th.iter()
            .enumerate()
            .map(|(i, t)| if i < cfg.n_core { t * report.c_core } else { t * report.c_cross })
            .collect()
    });
    Ok(TruthModel { p, latent: core.latent, theta, rescale: report })
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceMeta {
    pub graphon: String,
    pub n_core: usize,
    pub n_periphery: usize,
    pub periphery: ScoreModel,
    pub target_density: f64,
    pub degree_ratio: f64,
    pub seed: u64,
    pub rescale: RescaleReport,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub truth_model: TruthModel,
    pub graph: SparseGraph,
    /// The first `n_core` nodes are core.
    pub truth: Vec<bool>,
    pub meta: InstanceMeta,
}

/// Truth model plus one sampled adjacency matrix.
pub fn generate(cfg: &SynthConfig) -> Result<Instance> {
    let tm = truth_model(cfg)?;
    let graph = sample_adjacency(&tm.p, cfg.seed);
    let truth = (0..cfg.n()).map(|i| i < cfg.n_core).collect();
    let meta = InstanceMeta {
        graphon: cfg.graphon.to_string(),
        n_core: cfg.n_core,
        n_periphery: cfg.n_periphery,
        periphery: cfg.periphery,
        target_density: cfg.target_density,
        degree_ratio: cfg.degree_ratio,
        seed: cfg.seed,
        rescale: tm.rescale,
        edges: graph.m(),
    };
    Ok(Instance { truth_model: tm, graph, truth, meta })
}
