//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::coreid::{
    identify_top_k, kmeans_split, select_rank_ecv, threshold_config, threshold_er, CorePartition, EcvOptions,
    DEFAULT_KMEANS_FLOOR,
};
use crate::error::{CorexError, Result};
use crate::eval::{eigengap_profile, run_experiment, ExperimentConfig, Method, RankMode};
use crate::graph::{average_density, degrees, load_edge_list, write_edge_list, EdgeListDialect, ProbabilityMatrix};
use crate::io::{
    write_file, write_json, write_partition_csv, write_rank_json, write_roc_csv, write_scores_csv, write_truth_csv,
};
use crate::spectral::{config_scores, diagnostics, er_scores, truncated_eigs, EigenOptions, ScoreModel};
use crate::synth::{generate, is_er_type, truth_model, GraphonSpec, SizePreset, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "corex", version, about = "Spectral core-periphery identification")]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic core-periphery network.
    Generate(GenerateArgs),
    /// Score nodes of an edge list and split them into core and periphery.
    Identify(IdentifyArgs),
    /// Compare the spectral scores with the baselines on replicated simulations.
    Bench(BenchArgs),
    /// Spectral diagnostics of a known probability matrix or an observed graph.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// 1, 2, 3 or const:<p>.
    #[arg(long, default_value = "1", value_parser = parse_graphon)]
    #[serde(serialize_with = "display")]
    pub graphon: GraphonSpec,
    /// balanced (1000/1000), small-core (700/1300) or large-core (1300/700).
    #[arg(long, default_value = "balanced")]
    pub size: SizePreset,
    /// Overrides the size preset's core size.
    #[arg(long)]
    pub n_core: Option<usize>,
    /// Overrides the size preset's periphery size.
    #[arg(long)]
    pub n_periphery: Option<usize>,
    #[arg(long, default_value = "er")]
    pub periphery: ScoreModel,
    #[arg(long, default_value_t = 0.02)]
    pub density: f64,
}

impl SynthArgs {
    fn config(&self, ratio: f64, seed: u64) -> SynthConfig {
        let mut cfg = SynthConfig::new(self.graphon.clone(), self.size, self.periphery, ratio).with_seed(seed);
        if let Some(n) = self.n_core {
            cfg.n_core = n;
        }
        if let Some(n) = self.n_periphery {
            cfg.n_periphery = n;
        }
        cfg.target_density = self.density;
        cfg
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Mean core expected degree over mean periphery expected degree.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankArg {
    Auto,
    Fixed(usize),
}

impl FromStr for RankArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(RankArg::Auto);
        }
        match s.parse::<usize>() {
            Ok(r) if r >= 1 => Ok(RankArg::Fixed(r)),
            _ => Err(format!("rank must be a positive integer or `auto`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectArg {
    Topk(usize),
    Threshold,
    Kmeans,
}

impl FromStr for SelectArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "threshold" => Ok(SelectArg::Threshold),
            "kmeans" => Ok(SelectArg::Kmeans),
            _ => s
                .strip_prefix("topk:")
                .and_then(|k| k.parse().ok())
                .map(SelectArg::Topk)
                .ok_or_else(|| format!("selection must be topk:<N>, threshold or kmeans, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentifyArgs {
    /// Edge list: `i j` per line, optional `n <count>` header, `#` comments.
    #[arg(long)]
    pub input: PathBuf,
    /// Node ids in the input start at 1.
    #[arg(long)]
    pub one_based: bool,
    #[arg(long, default_value = "er")]
    pub model: ScoreModel,
    /// Positive integer, or `auto` for edge cross-validation.
    #[arg(long, default_value = "auto")]
    pub rank: RankArg,
    /// Largest rank tried by `--rank auto`.
    #[arg(long, default_value_t = 10)]
    pub max_rank: usize,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    /// topk:<N>, threshold or kmeans.
    #[arg(long, default_value = "kmeans")]
    pub select: SelectArg,
    /// Exponent slack of the threshold rule.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// fig2-g<K> (ER-type periphery) or fig3-g<K> (configuration-type) for K in 1..=3;
    /// sets --graphon and --periphery.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub synth: SynthArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub ratios: Vec<f64>,
    /// Comma-separated subset of spectral_er, spectral_config, degree, pagerank,
    /// eigenvector, local_cc, coreness.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// Positive integer, `auto` (cross-validation over 1..=10) or `nominal`
    /// (the graphon's rank, cross-validation when it has none).
    #[arg(long, default_value = "nominal")]
    pub rank: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    /// `meta.json` written by `generate`; the probability matrix is rebuilt from it.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub truth_p: Option<PathBuf>,
    /// Observed edge list; its adjacency matrix stands in for P.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Fail unless h(n) and h'(n) can be reported.
    #[arg(long)]
    pub require_h: bool,
    /// Rank whose eigengap is reported.
    #[arg(long, default_value_t = 3)]
    pub rank: usize,
    /// Periphery sizes for an eigengap sweep over the truth's core block.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
    /// Periphery level in the sweep (default: the truth's mean density).
    #[arg(long)]
    pub sweep_level: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_graphon(s: &str) -> std::result::Result<GraphonSpec, String> {
    s.parse()
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    args: &'a T,
}

/// Creates the output directory and writes `run.json`.
fn start_run<T: Serialize>(out_dir: &Path, command: &str, args: &T) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let record = RunRecord { command, version: env!("CARGO_PKG_VERSION"), args };
    write_file(&out_dir.join("run.json"), |w| write_json(&record, w))
}

fn warn(msg: impl std::fmt::Display) {
    let _ = writeln!(std::io::stderr(), "corex: warning: {msg}");
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let cfg = args.synth.config(args.ratio, args.common.seed);
    cfg.validate()?;
    let inst = generate(&cfg)?;
    let out = &args.common.out_dir;
    start_run(out, "generate", args)?;
    if inst.meta.rescale.clipped > 0 {
        warn(format!("{} probabilities clipped to 1 while rescaling", inst.meta.rescale.clipped));
    }
    write_file(&out.join("edges.tsv"), |w| write_edge_list(&inst.graph, w))?;
    write_file(&out.join("truth.csv"), |w| write_truth_csv(&inst.truth, w))?;
    write_file(&out.join("meta.json"), |w| write_json(&inst.meta, w))
}

#[derive(Serialize)]
struct IdentifySummary<'a> {
    model: ScoreModel,
    rank: usize,
    rank_selected_by: &'a str,
    selection: &'a CorePartition,
    p_hat: f64,
    /// Zero-degree nodes left out of configuration-type scoring.
    excluded: &'a [usize],
}

fn cmd_identify(args: &IdentifyArgs) -> Result<()> {
    let dialect = EdgeListDialect { one_based: args.one_based, ..Default::default() };
    let g = load_edge_list(BufReader::new(File::open(&args.input)?), dialect)?;
    let n = g.n();
    if g.m() == 0 {
        return Err(CorexError::domain("graph has no edges"));
    }
    if let RankArg::Fixed(r) = args.rank {
        if r >= n {
            return Err(CorexError::domain(format!("rank {r} must be below n = {n}")));
        }
    }
    if let SelectArg::Topk(k) = args.select {
        if k > n {
            return Err(CorexError::domain(format!("top-k size {k} exceeds n = {n}")));
        }
    }
    let out = &args.common.out_dir;
    start_run(out, "identify", args)?;
    let seed = args.common.seed;

    let (rank, selected_by) = match args.rank {
        RankArg::Fixed(r) => (r, "fixed"),
        RankArg::Auto => {
            let candidates: Vec<usize> = (1..=args.max_rank.min(n - 1)).collect();
            let opts = EcvOptions { folds: args.folds, holdout_fraction: args.holdout, seed };
            let sel = select_rank_ecv(&g, &candidates, &opts)?;
            write_file(&out.join("rank.json"), |w| write_rank_json(&sel, w))?;
            (sel.chosen_r, "ecv")
        }
    };
    let dec = truncated_eigs(&g, &EigenOptions::new(rank).seed(seed))?;
    let scores = match args.model {
        ScoreModel::Er => er_scores(&dec),
        ScoreModel::Config => config_scores(&dec, &degrees(&g)),
    };
    if !scores.excluded.is_empty() {
        warn(format!("{} zero-degree nodes excluded and labelled periphery", scores.excluded.len()));
    }
    let p_hat = average_density(&g)?;
    let partition = match args.select {
        SelectArg::Topk(k) => identify_top_k(&scores.values, k)?,
        SelectArg::Threshold => match args.model {
            ScoreModel::Er => threshold_er(&scores, p_hat, n, args.eps)?,
            ScoreModel::Config => threshold_config(&scores, p_hat, n, args.eps)?,
        },
        SelectArg::Kmeans => kmeans_split(&scores.values, DEFAULT_KMEANS_FLOOR)?,
    };
    write_file(&out.join("scores.csv"), |w| write_scores_csv(&scores.values, w))?;
    write_file(&out.join("partition.csv"), |w| write_partition_csv(&partition, &scores.values, w))?;
    let summary = IdentifySummary {
        model: args.model,
        rank,
        rank_selected_by: selected_by,
        selection: &partition,
        p_hat,
        excluded: &scores.excluded,
    };
    write_file(&out.join("summary.json"), |w| write_json(&summary, w))
}

fn bench_preset(name: &str) -> Result<(GraphonSpec, ScoreModel)> {
    let bad = || CorexError::domain(format!("unknown bench preset `{name}` (expected fig2-g1..3 or fig3-g1..3)"));
    let (fig, g) = name.split_once("-g").ok_or_else(bad)?;
    let periphery = match fig {
        "fig2" => ScoreModel::Er,
        "fig3" => ScoreModel::Config,
        _ => return Err(bad()),
    };
    let graphon = match g {
        "1" | "2" | "3" => g.parse().map_err(CorexError::Domain)?,
        _ => return Err(bad()),
    };
    Ok((graphon, periphery))
}

fn parse_rank_mode(s: &str) -> Result<RankMode> {
    match s {
        "nominal" => Ok(RankMode::Nominal),
        "auto" => Ok(RankMode::Ecv((1..=10).collect())),
        _ => match s.parse::<usize>() {
            Ok(r) if r >= 1 => Ok(RankMode::Fixed(r)),
            _ => Err(CorexError::domain(format!("rank must be a positive integer, auto or nominal, got `{s}`"))),
        },
    }
}

#[derive(Serialize)]
struct BenchRatio<'a> {
    ratio: f64,
    result: &'a crate::eval::ExperimentResult,
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    graphon: String,
    periphery: ScoreModel,
    n_core: usize,
    n_periphery: usize,
    target_density: f64,
    replicates: usize,
    rank_mode: &'a RankMode,
    methods: &'a [Method],
    ratios: Vec<BenchRatio<'a>>,
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut synth = args.synth.clone();
    if let Some(p) = &args.preset {
        let (graphon, periphery) = bench_preset(p)?;
        synth.graphon = graphon;
        synth.periphery = periphery;
    }
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::all()
    } else {
        args.methods.iter().map(|m| m.parse()).collect::<std::result::Result<_, _>>().map_err(CorexError::Domain)?
    };
    let rank_mode = parse_rank_mode(&args.rank)?;
    if args.ratios.is_empty() {
        return Err(CorexError::domain("no degree ratios given"));
    }
    let configs: Vec<SynthConfig> = args.ratios.iter().map(|&r| synth.config(r, args.common.seed)).collect();
    for c in &configs {
        c.validate()?;
    }
    let out = &args.common.out_dir;
    start_run(out, "bench", args)?;

    let mut results = Vec::new();
    for cfg in &configs {
        let exp = ExperimentConfig {
            synth: cfg.clone(),
            methods: methods.clone(),
            replicates: args.replicates,
            rank_mode: rank_mode.clone(),
        };
        results.push(run_experiment(&exp)?);
    }
    for (cfg, res) in configs.iter().zip(&results) {
        for s in &res.summary {
            let path = out.join(format!("roc_{}_ratio{}.csv", s.method, cfg.degree_ratio));
            write_file(&path, |w| write_roc_csv(&s.method.to_string(), &s.mean_roc, w))?;
        }
    }
    let first = &configs[0];
    let summary = BenchSummary {
        graphon: first.graphon.to_string(),
        periphery: first.periphery,
        n_core: first.n_core,
        n_periphery: first.n_periphery,
        target_density: first.target_density,
        replicates: args.replicates,
        rank_mode: &rank_mode,
        methods: &methods,
        ratios: configs.iter().zip(&results).map(|(c, r)| BenchRatio { ratio: c.degree_ratio, result: r }).collect(),
    };
    write_file(&out.join("summary.json"), |w| write_json(&summary, w))
}

/// The fields of `meta.json` needed to rebuild the probability matrix.
#[derive(Debug, Deserialize)]
struct MetaConfig {
    graphon: String,
    n_core: usize,
    n_periphery: usize,
    periphery: ScoreModel,
    target_density: f64,
    degree_ratio: f64,
    seed: u64,
}

fn read_meta(path: &Path) -> Result<SynthConfig> {
    let meta: MetaConfig = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let cfg = SynthConfig {
        graphon: meta.graphon.parse().map_err(CorexError::Domain)?,
        n_core: meta.n_core,
        n_periphery: meta.n_periphery,
        periphery: meta.periphery,
        target_density: meta.target_density,
        degree_ratio: meta.degree_ratio,
        seed: meta.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let truth_cfg = args.truth_p.as_deref().map(read_meta).transpose()?;
    let graph = match &args.input {
        Some(path) => Some(load_edge_list(BufReader::new(File::open(path)?), EdgeListDialect::default())?),
        None => None,
    };
    if args.require_h && truth_cfg.is_none() {
        return Err(CorexError::domain("h(n) needs a known probability matrix; pass --truth-p"));
    }
    if !args.sweep.is_empty() && truth_cfg.is_none() {
        return Err(CorexError::domain("an eigengap sweep needs --truth-p"));
    }
    let (p, core, n_core) = match (&truth_cfg, &graph) {
        (Some(cfg), _) => {
            let tm = truth_model(cfg)?;
            // a constant matrix is pure ER: no node carries core structure
            let labels = (!is_er_type(&tm.p, 0)).then(|| (0..cfg.n()).map(|i| i < cfg.n_core).collect::<Vec<bool>>());
            (tm.p, labels, cfg.n_core)
        }
        (None, Some(g)) => (ProbabilityMatrix::new(g.to_dense())?, None, 0),
        (None, None) => unreachable!("clap requires one of --truth-p and --input"),
    };
    let report = diagnostics(&p, args.rank, core.as_deref());
    if args.require_h && report.h_n.is_none() {
        return Err(CorexError::domain("the truth has no core, so h(n) is undefined"));
    }
    let out = &args.common.out_dir;
    start_run(out, "diagnose", args)?;
    write_file(&out.join("diagnostics.json"), |w| write_json(&report, w))?;

    if !args.sweep.is_empty() {
        let core_p = ProbabilityMatrix::new(p.matrix().view((0, 0), (n_core, n_core)).into_owned())?;
        let level = args.sweep_level.unwrap_or_else(|| p.mean_density());
        let series = eigengap_profile(&core_p, &args.sweep, level)?;
        write_file(&out.join("eigengap.csv"), |w| {
            writeln!(w, "n_periphery,lambda1,lambda2,lambda3,lambda4,gap,normalized_gap")?;
            for pt in &series {
                let [l1, l2, l3, l4] = pt.eigenvalues;
                writeln!(w, "{},{l1},{l2},{l3},{l4},{},{}", pt.n_periphery, pt.gap, pt.normalized_gap)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let body = || match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Identify(a) => cmd_identify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    };
    match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CorexError::domain(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("corex: {e}");
            e.exit_code()
        }
    }
}
