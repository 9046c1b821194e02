//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr
//! (written directly, so it shows even when libtest captures output) and
//! then asserts the criterion.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use corex::baselines::{coreness_scores, pagerank_scores, DEFAULT_DAMPING};
use corex::coreid::{identify_top_k, select_rank_ecv, threshold_config, threshold_er, EcvOptions};
use corex::eval::{eigengap_profile, roc, run_experiment, ExperimentConfig, Method, RankMode};
use corex::graph::{average_density, degrees, DegreeVector, ProbabilityMatrix, SparseGraph};
use corex::spectral::{
    config_scores, decompose, er_scores, scores_from_truth_with_degrees, truncated_eigs, EigenOptions, EigenOrder,
    ScoreModel, SpectralDecomposition,
};
use corex::synth::{generate, graphon_core, GraphonSpec, SizePreset, SynthConfig};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance {id:>2}] {status} {name}: {detail}");
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    SparseGraph::from_edges(n, edges).unwrap()
}

// ---------------------------------------------------------------- 1

const C1_INSTANCES: usize = 50;
const C1_MAX_N: usize = 200;
const C1_MAX_R: usize = 10;
const C1_REL_TOL: f64 = 1e-10;
const C1_TIME: Duration = Duration::from_secs(10);

/// `|(U L U^T D^-1 H)_{i,*}|` formed densely, with the columns listed in
/// `keep` only (all columns for the ER-type score).
fn dense_scores(dec: &SpectralDecomposition, col_scale: &[f64], keep: &[usize]) -> Vec<f64> {
    let u = dec.eigenvectors();
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(dec.eigenvalues()));
    let p_hat = u * lambda * u.transpose();
    let m = keep.len() as f64;
    (0..u.nrows())
        .map(|i| {
            let row: Vec<f64> = keep.iter().map(|&j| p_hat[(i, j)] * col_scale[j]).collect();
            let mean = row.iter().sum::<f64>() / m;
            row.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt()
        })
        .collect()
}

#[test]
fn c01_gram_trick_matches_dense_scores() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..C1_INSTANCES {
        let n = rng.gen_range(C1_MAX_R + 2..=C1_MAX_N);
        let r = rng.gen_range(1..=C1_MAX_R);
        let gauss = DMatrix::from_fn(n, r, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let u = gauss.qr().q();
        let mut eig: Vec<f64> = (0..r).map(|_| rng.gen_range(-20.0..20.0)).collect();
        eig.sort_by(|a: &f64, b: &f64| b.abs().total_cmp(&a.abs()));
        let dec = SpectralDecomposition::new(eig, u, EigenOrder::Magnitude);

        let all: Vec<usize> = (0..n).collect();
        let er = er_scores(&dec);
        for (a, b) in er.values.iter().zip(dense_scores(&dec, &vec![1.0; n], &all)) {
            worst = worst.max(rel_err(*a, b));
        }

        // a few zero-degree nodes are excluded from the degree correction
        let d: Vec<f64> =
            (0..n).map(|_| if rng.gen::<f64>() < 0.05 { 0.0 } else { rng.gen_range(1..60) as f64 }).collect();
        let keep: Vec<usize> = (0..n).filter(|&i| d[i] > 0.0).collect();
        let inv: Vec<f64> = d.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect();
        let cfg = config_scores(&dec, &DegreeVector::new(d.clone()));
        let dense = dense_scores(&dec, &inv, &keep);
        for i in 0..n {
            let expect = if d[i] > 0.0 { dense[i] } else { 0.0 };
            worst = worst.max(rel_err(cfg.values[i], expect));
        }
        assert_eq!(cfg.excluded, (0..n).filter(|&i| d[i] == 0.0).collect::<Vec<_>>());
    }
    let elapsed = start.elapsed();
    let pass = worst <= C1_REL_TOL && elapsed < C1_TIME;
    report(1, "Gram-trick scores vs dense", pass, format!("max rel err {worst:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

// ---------------------------------------------------------------- 2

const C2_SIZES: [usize; 2] = [10, 100];
const C2_TOL: f64 = 1e-10;
const C2_TIME: Duration = Duration::from_secs(1);

#[test]
fn c02_configuration_periphery_score_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_stated, mut worst_full): (f64, f64) = (0.0, 0.0);
    for &n in &C2_SIZES {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
        let total: f64 = d.iter().sum();
        let p = ProbabilityMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { d[i] * d[j] / total });
        let s = scores_from_truth_with_degrees(&p, &DegreeVector::new(d.clone())).unwrap();
        let root = ((n as f64 - 1.0) / n as f64).sqrt();
        for i in 0..n {
            let stated = root * d[i] / (total - d[i]);
            worst_stated = worst_stated.max((s.values[i] - stated).abs());
            let full = root * d[i] / total;
            worst_full = worst_full.max((s.values[i] - full).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_stated <= C2_TOL && elapsed < C2_TIME;
    report(
        2,
        "config periphery score = sqrt((n-1)/n) d_i / sum_{k!=i} d_k",
        pass,
        format!(
            "max abs err {worst_stated:.2e} (against d_i / sum_k d_k: {worst_full:.2e}), {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 3 and 4

const C34_REPLICATES: u64 = 20;
const C34_REQUIRED: usize = 18;
const C34_DENSITY: f64 = 0.02;
const C34_RATIO: f64 = 3.0;
const C34_RANK: usize = 6;
const C3_TIME: Duration = Duration::from_secs(5 * 60);
const C4_TIME: Duration = Duration::from_secs(10 * 60);

fn c34_config(periphery: ScoreModel, seed: u64) -> SynthConfig {
    let mut cfg = SynthConfig::new(GraphonSpec::Blocks, SizePreset::Balanced, periphery, C34_RATIO).with_seed(seed);
    cfg.target_density = C34_DENSITY;
    cfg
}

#[test]
fn c03_exact_recovery_top_k() {
    let start = Instant::now();
    let mut exact = 0;
    let mut errors = Vec::new();
    for seed in 0..C34_REPLICATES {
        let inst = generate(&c34_config(ScoreModel::Er, seed)).unwrap();
        let n_core = inst.truth.iter().filter(|&&t| t).count();
        let dec = decompose(&inst.graph, C34_RANK, seed).unwrap();
        let part = identify_top_k(&er_scores(&dec).values, n_core).unwrap();
        let wrong = part.labels.iter().zip(&inst.truth).filter(|(a, b)| a != b).count();
        errors.push(wrong);
        if wrong == 0 {
            exact += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = exact >= C34_REQUIRED && elapsed < C3_TIME;
    report(
        3,
        "exact recovery, top-k",
        pass,
        format!("{exact}/{C34_REPLICATES} exact (misclassified per replicate {errors:?}), {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn c04_threshold_selects_true_core_size() {
    let start = Instant::now();
    let mut hits = HashMap::new();
    let mut sizes: HashMap<ScoreModel, Vec<usize>> = HashMap::new();
    for model in [ScoreModel::Er, ScoreModel::Config] {
        let mut exact = 0;
        for seed in 0..C34_REPLICATES {
            let inst = generate(&c34_config(model, seed)).unwrap();
            let n = inst.graph.n();
            let n_core = inst.truth.iter().filter(|&&t| t).count();
            let dec = decompose(&inst.graph, C34_RANK, seed).unwrap();
            let p_hat = average_density(&inst.graph).unwrap();
            let part = match model {
                ScoreModel::Er => threshold_er(&er_scores(&dec), p_hat, n, corex::coreid::DEFAULT_EPS),
                ScoreModel::Config => {
                    threshold_config(&config_scores(&dec, &degrees(&inst.graph)), p_hat, n, corex::coreid::DEFAULT_EPS)
                }
            }
            .unwrap();
            sizes.entry(model).or_default().push(part.n_core);
            if part.n_core == n_core {
                exact += 1;
            }
        }
        hits.insert(model, exact);
    }
    let elapsed = start.elapsed();
    let pass = hits.values().all(|&h| h >= C34_REQUIRED) && elapsed < C4_TIME;
    report(
        4,
        "threshold selection recovers N_core",
        pass,
        format!(
            "ER {}/{C34_REPLICATES} sizes {:?}; config {}/{C34_REPLICATES} sizes {:?}; {elapsed:.2?}",
            hits[&ScoreModel::Er],
            sizes[&ScoreModel::Er],
            hits[&ScoreModel::Config],
            sizes[&ScoreModel::Config]
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 5

const C5_REPLICATES: usize = 20;
const C5_MARGIN: f64 = 0.1;
const C5_DEGREE_MAX: f64 = 0.6;
const C5_RATIO: f64 = 1.0;
const C5_TIME: Duration = Duration::from_secs(20 * 60);

#[test]
fn c05_spectral_dominates_baselines_at_equal_density() {
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for periphery in [ScoreModel::Er, ScoreModel::Config] {
        for graphon in [GraphonSpec::Blocks, GraphonSpec::Sinusoid] {
            let exp = ExperimentConfig {
                synth: SynthConfig::new(graphon.clone(), SizePreset::Balanced, periphery, C5_RATIO),
                methods: Method::all(),
                replicates: C5_REPLICATES,
                rank_mode: RankMode::Nominal,
            };
            let res = run_experiment(&exp).unwrap();
            let auc = |m: Method| res.summary.iter().find(|s| s.method == m).unwrap().mean_auc;
            let ours = auc(Method::Spectral(periphery));
            let best_baseline = res
                .summary
                .iter()
                .filter(|s| matches!(s.method, Method::Baseline(_)))
                .max_by(|a, b| a.mean_auc.total_cmp(&b.mean_auc))
                .unwrap();
            let degree = auc(Method::Baseline(corex::baselines::BaselineMethod::Degree));
            let ok = ours - best_baseline.mean_auc >= C5_MARGIN && degree <= C5_DEGREE_MAX;
            pass &= ok;
            lines.push(format!(
                "{periphery}/g{graphon}: spectral {ours:.3}, best baseline {} {:.3}, degree {degree:.3}{}",
                best_baseline.method,
                best_baseline.mean_auc,
                if ok { "" } else { " (short)" }
            ));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < C5_TIME;
    report(5, "spectral AUC beats baselines at ratio 1", pass, format!("{}; {elapsed:.2?}", lines.join("; ")));
    assert!(pass);
}

// ---------------------------------------------------------------- 6

const C6_SWEEP: [usize; 5] = [0, 500, 1000, 2000, 4000];
const C6_CORE: usize = 1000;
const C6_TIME: Duration = Duration::from_secs(2 * 60);

#[test]
fn c06_eigengap_collapses_with_periphery() {
    let start = Instant::now();
    let core = graphon_core(&GraphonSpec::Sinusoid, C6_CORE, 6).unwrap();
    let level = core.p.mean_density();
    let series = eigengap_profile(&core.p, &C6_SWEEP, level).unwrap();
    let gaps: Vec<f64> = series.iter().map(|g| g.normalized_gap).collect();
    let elapsed = start.elapsed();
    let pass = gaps[0] > 0.0 && gaps.windows(2).all(|w| w[1] < w[0]) && elapsed < C6_TIME;
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.4}")).collect();
    report(6, "normalized eigengap decreases along periphery sweep", pass, format!("{shown:?}, {elapsed:.2?}"));
    assert!(pass);
}

// ---------------------------------------------------------------- 7

const C7_CASES: usize = 100;
const C7_MAX_N: usize = 200;
const C7_TOL: f64 = 1e-12;

#[test]
fn c07_auc_equals_mann_whitney() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..C7_CASES {
        let n = rng.gen_range(2..=C7_MAX_N);
        // half the cases draw from a handful of levels so ties are common
        let levels = if case % 2 == 0 { 5 } else { 1_000_000 };
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64).collect();
        let mut truth: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
        truth[0] = true;
        truth[1] = false;
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if truth[i] && !truth[j] {
                    pairs += 1.0;
                    if values[i] > values[j] {
                        wins += 1.0;
                    } else if values[i] == values[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        let auc = roc(&values, &truth, "x").unwrap().auc;
        worst = worst.max((auc - wins / pairs).abs());
    }
    let pass = worst <= C7_TOL;
    report(7, "AUC equals Mann-Whitney statistic", pass, format!("max abs err {worst:.2e} over {C7_CASES} cases"));
    assert!(pass);
}

// ---------------------------------------------------------------- 8

const C8_CASES: usize = 50;
const C8_MAX_N: usize = 300;
const C8_MAX_R: usize = 10;
const C8_EIG_TOL: f64 = 1e-8;
const C8_ANGLE_TOL: f64 = 1e-6;
const C8_GAP_MIN: f64 = 1e-6;
const C8_ORTHO_TOL: f64 = 1e-8;

#[test]
fn c08_truncated_eigs_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_eig, mut worst_angle, mut worst_ortho): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut angle_checked = 0;
    for case in 0..C8_CASES {
        let n = rng.gen_range(C8_MAX_R + 2..=C8_MAX_N);
        let density = rng.gen_range(0.02..0.5);
        let g = random_graph(&mut rng, n, density);
        let r = rng.gen_range(1..=C8_MAX_R);
        let dec = truncated_eigs(&g, &EigenOptions::new(r).seed(case as u64)).unwrap();

        let dense = SymmetricEigen::new(g.to_dense());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dense.eigenvalues[b].abs().total_cmp(&dense.eigenvalues[a].abs()));
        let lam1 = dense.eigenvalues[order[0]].abs();
        for k in 0..r {
            let d = (dec.eigenvalues()[k] - dense.eigenvalues[order[k]]).abs() / lam1.max(1.0);
            worst_eig = worst_eig.max(d);
        }

        let u = dec.eigenvectors();
        let gram = u.tr_mul(u) - DMatrix::identity(r, r);
        worst_ortho = worst_ortho.max(gram.amax());

        let gap = dense.eigenvalues[order[r - 1]].abs() - dense.eigenvalues[order[r]].abs();
        if gap > C8_GAP_MIN {
            let q = DMatrix::from_fn(n, r, |i, k| dense.eigenvectors[(i, order[k])]);
            let resid = u - &q * q.tr_mul(u);
            let sin_max = resid.singular_values().max().min(1.0);
            worst_angle = worst_angle.max(sin_max.asin());
            angle_checked += 1;
        }
    }
    let pass = worst_eig <= C8_EIG_TOL && worst_angle <= C8_ANGLE_TOL && worst_ortho <= C8_ORTHO_TOL;
    report(
        8,
        "truncated eigensolver vs dense",
        pass,
        format!(
            "max scaled |dlambda| {worst_eig:.2e}, max principal angle {worst_angle:.2e} ({angle_checked} cases), \
             orthonormality {worst_ortho:.2e}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 9

const C9_GRAPHS: usize = 50;
const C9_MAX_N: usize = 50;
const C9_SUM_TOL: f64 = 1e-10;
const C9_STAR_TOL: f64 = 1e-6;

/// k-cores by repeated deletion of nodes with fewer than k live neighbours.
fn brute_coreness(g: &SparseGraph) -> Vec<f64> {
    let n = g.n();
    let mut core = vec![0.0; n];
    for k in 1..=n {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&i| alive[i] && g.neighbors(i).iter().filter(|&&j| alive[j]).count() < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            for i in drop {
                alive[i] = false;
            }
        }
        if !alive.iter().any(|&a| a) {
            break;
        }
        for i in (0..n).filter(|&i| alive[i]) {
            core[i] = k as f64;
        }
    }
    core
}

#[test]
fn c09_baselines_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut coreness_ok = true;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..C9_GRAPHS {
        let n = rng.gen_range(1..=C9_MAX_N);
        let density = rng.gen_range(0.0..0.6);
        let g = random_graph(&mut rng, n, density);
        coreness_ok &= coreness_scores(&g).values == brute_coreness(&g);
        let pr = pagerank_scores(&g, DEFAULT_DAMPING, corex::baselines::DEFAULT_TOL).unwrap();
        worst_sum = worst_sum.max((pr.values.iter().sum::<f64>() - 1.0).abs());
    }
    let star = SparseGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let pr = pagerank_scores(&star, DEFAULT_DAMPING, corex::baselines::DEFAULT_TOL).unwrap();
    // center c and leaf l solve c = 0.0375 + 2.55 l, l = 0.0375 + 0.85 c / 3
    let center = 0.133_125 / 0.2775;
    let leaf = 0.0375 + 0.85 * center / 3.0;
    let star_err = (pr.values[0] - center)
        .abs()
        .max(pr.values[1..].iter().map(|v| (v - leaf).abs()).fold(0.0, f64::max));
    let star_printed = (pr.values[0] - 0.47973).abs() < 1e-5 && (pr.values[1] - 0.17342).abs() < 1e-5;
    let pass = coreness_ok && worst_sum <= C9_SUM_TOL && star_err <= C9_STAR_TOL && star_printed;
    report(
        9,
        "coreness, PageRank mass and star values",
        pass,
        format!("coreness exact: {coreness_ok}, max |sum-1| {worst_sum:.2e}, star err {star_err:.2e}"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 10

const C10_N: usize = 300;
const C10_SEEDS: u64 = 20;
const C10_REQUIRED: usize = 18;
const C10_RANK1_P: f64 = 0.1;
const C10_SBM_IN: f64 = 0.5;
const C10_SBM_OUT: f64 = 0.1;

fn sample(p: impl Fn(usize, usize) -> f64, rng: &mut ChaCha8Rng) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..C10_N {
        for j in i + 1..C10_N {
            if rng.gen::<f64>() < p(i, j) {
                edges.push((i, j));
            }
        }
    }
    SparseGraph::from_edges(C10_N, edges).unwrap()
}

#[test]
fn c10_ecv_recovers_planted_rank() {
    let block = |i: usize| i * 3 / C10_N;
    let mut chosen: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for seed in 0..C10_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let g1 = sample(|_, _| C10_RANK1_P, &mut rng);
        let g3 = sample(|i, j| if block(i) == block(j) { C10_SBM_IN } else { C10_SBM_OUT }, &mut rng);
        let opts = EcvOptions { seed, ..Default::default() };
        chosen.entry(1).or_default().push(select_rank_ecv(&g1, &[1, 2, 3, 4], &opts).unwrap().chosen_r);
        chosen.entry(3).or_default().push(select_rank_ecv(&g3, &[1, 2, 3, 4, 5, 6], &opts).unwrap().chosen_r);
    }
    let hits = |r: usize| chosen[&r].iter().filter(|&&c| c == r).count();
    let pass = hits(1) >= C10_REQUIRED && hits(3) >= C10_REQUIRED;
    report(
        10,
        "edge cross-validation picks the planted rank",
        pass,
        format!("rank 1: {}/{C10_SEEDS} {:?}; rank 3: {}/{C10_SEEDS} {:?}", hits(1), chosen[&1], hits(3), chosen[&3]),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 11

const C11_THREADS: [&str; 2] = ["1", "4"];

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

/// Runs `args` (with `--out-dir out`) in a fresh directory under `root`.
fn run_in(root: &Path, tag: &str, threads: &str, args: &[&str]) -> BTreeMap<String, Vec<u8>> {
    let cwd = root.join(tag);
    fs::create_dir_all(&cwd).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_corex"))
        .current_dir(&cwd)
        .args(["--threads", threads])
        .args(args)
        .args(["--out-dir", "out"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    dir_contents(&cwd.join("out"))
}

#[test]
fn c11_cli_outputs_are_bit_identical() {
    let tmp = tempfile::TempDir::new().unwrap();
    let root = tmp.path();
    let input = root.join("edges.tsv");
    let meta = root.join("meta.json");
    let (input_s, meta_s) = (input.to_str().unwrap().to_string(), meta.to_str().unwrap().to_string());
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "generate",
            vec!["generate", "--graphon", "2", "--n-core", "300", "--n-periphery", "300", "--periphery", "config", "--density", "0.05", "--ratio", "3", "--seed", "11"],
        ),
        ("identify", vec!["identify", "--input", &input_s, "--model", "config", "--rank", "auto", "--seed", "11"]),
        ("identify-threshold", vec!["identify", "--input", &input_s, "--rank", "3", "--select", "threshold"]),
        (
            "bench",
            vec!["bench", "--preset", "fig3-g2", "--n-core", "150", "--n-periphery", "150", "--density", "0.1", "--replicates", "3", "--rank", "auto"],
        ),
        ("diagnose", vec!["diagnose", "--truth-p", &meta_s, "--sweep", "0,100,200"]),
    ];
    let mut mismatched = Vec::new();
    let mut first = true;
    for (name, args) in &commands {
        let runs: Vec<_> = C11_THREADS
            .iter()
            .chain(&C11_THREADS[..1])
            .enumerate()
            .map(|(k, t)| run_in(root, &format!("{name}-{k}"), t, args))
            .collect();
        if first {
            // later commands read the generated instance
            fs::write(&input, &runs[0]["edges.tsv"]).unwrap();
            fs::write(&meta, &runs[0]["meta.json"]).unwrap();
            first = false;
        }
        if runs.iter().any(|r| r != &runs[0] || r.is_empty()) {
            mismatched.push(*name);
        }
    }
    let pass = mismatched.is_empty();
    report(
        11,
        "CLI outputs identical across reruns and thread counts",
        pass,
        if pass { format!("{} commands x 3 runs", commands.len()) } else { format!("differences in {mismatched:?}") },
    );
    assert!(pass);
}
