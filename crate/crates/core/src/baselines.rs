//! Reference centrality scores used as comparison curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CorexError, Result};
use crate::graph::SparseGraph;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-12;
const PAGERANK_MAX_ITER: usize = 1000;
const EIGENVECTOR_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Degree,
    Pagerank,
    Eigenvector,
    LocalCc,
    Coreness,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 5] = [
        BaselineMethod::Degree,
        BaselineMethod::Pagerank,
        BaselineMethod::Eigenvector,
        BaselineMethod::LocalCc,
        BaselineMethod::Coreness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Degree => "degree",
            BaselineMethod::Pagerank => "pagerank",
            BaselineMethod::Eigenvector => "eigenvector",
            BaselineMethod::LocalCc => "local_cc",
            BaselineMethod::Coreness => "coreness",
        }
    }

    /// Scores with default parameters.
    pub fn score(self, g: &SparseGraph) -> Result<BaselineScores> {
        match self {
            BaselineMethod::Degree => Ok(degree_scores(g)),
            BaselineMethod::Pagerank => pagerank_scores(g, DEFAULT_DAMPING, DEFAULT_TOL),
            BaselineMethod::Eigenvector => eigenvector_scores(g, DEFAULT_TOL),
            BaselineMethod::LocalCc => Ok(local_cc_scores(g)),
            BaselineMethod::Coreness => Ok(coreness_scores(g)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineScores {
    pub values: Vec<f64>,
    pub method: BaselineMethod,
}

pub fn degree_scores(g: &SparseGraph) -> BaselineScores {
    BaselineScores {
        values: (0..g.n()).map(|i| g.degree(i) as f64).collect(),
        method: BaselineMethod::Degree,
    }
}

/// Power iteration for `pr = (1 - d)/n + d W^T pr`, with isolated nodes
/// spreading their mass uniformly.
pub fn pagerank_scores(g: &SparseGraph, damping: f64, tol: f64) -> Result<BaselineScores> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(CorexError::domain(format!("damping {damping} must lie in (0,1)")));
    }
    let n = g.n();
    if n == 0 {
        return Ok(BaselineScores { values: vec![], method: BaselineMethod::Pagerank });
    }
    let nf = n as f64;
    let mut pr = vec![1.0 / nf; n];
    let mut residual = f64::INFINITY;
    for _ in 0..PAGERANK_MAX_ITER {
        let dangling: f64 = (0..n).filter(|&i| g.degree(i) == 0).map(|i| pr[i]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let mut next: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let inflow: f64 = g.neighbors(i).iter().map(|&j| pr[j] / g.degree(j) as f64).sum();
                base + damping * inflow
            })
            .collect();
        // guards the unit sum against accumulated rounding
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = next.iter().zip(&pr).map(|(a, b)| (a - b).abs()).sum();
        pr = next;
        if residual <= tol {
            return Ok(BaselineScores { values: pr, method: BaselineMethod::Pagerank });
        }
    }
    Err(CorexError::Convergence { what: "pagerank", iterations: PAGERANK_MAX_ITER, residual })
}

/// Leading eigenvector of the adjacency matrix, nonnegative and of unit norm.
/// Iterates with `A + I`, which has the same eigenvectors but no
/// oscillation on bipartite graphs.
pub fn eigenvector_scores(g: &SparseGraph, tol: f64) -> Result<BaselineScores> {
    let n = g.n();
    if g.m() == 0 {
        return Err(CorexError::domain("eigenvector centrality needs at least one edge"));
    }
    let normalize = |v: &mut Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    let mut x = vec![1.0; n];
    normalize(&mut x);
    let mut residual = f64::INFINITY;
    for _ in 0..EIGENVECTOR_MAX_ITER {
        let mut y: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| x[i] + g.neighbors(i).iter().map(|&j| x[j]).sum::<f64>())
            .collect();
        normalize(&mut y);
        residual = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if residual <= tol {
            return Ok(BaselineScores { values: x, method: BaselineMethod::Eigenvector });
        }
    }
    Err(CorexError::Convergence { what: "eigenvector centrality", iterations: EIGENVECTOR_MAX_ITER, residual })
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// `2 T_i / (d_i (d_i - 1))`, zero when `d_i < 2`.
pub fn local_cc_scores(g: &SparseGraph) -> BaselineScores {
    let values = (0..g.n())
        .into_par_iter()
        .map(|i| {
            let nbrs = g.neighbors(i);
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            // each triangle through i is seen from both of its other corners
            let twice: usize = nbrs.iter().map(|&j| sorted_intersection(nbrs, g.neighbors(j))).sum();
            twice as f64 / (d * (d - 1)) as f64
        })
        .collect();
    BaselineScores { values, method: BaselineMethod::LocalCc }
}

/// Core numbers by bucket peeling in `O(n + m)`.
pub fn coreness_scores(g: &SparseGraph) -> BaselineScores {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // nodes sorted by degree, with bucket start offsets
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    let mut next = bin.clone();
    for v in 0..n {
        pos[v] = next[deg[v]];
        order[pos[v]] = v;
        next[deg[v]] += 1;
    }

    for k in 0..n {
        let v = order[k];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                // move u to the front of its bucket, then shrink the bucket
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    BaselineScores {
        values: deg.into_iter().map(|d| d as f64).collect(),
        method: BaselineMethod::Coreness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_adjacency, ProbabilityMatrix};
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SparseGraph {
        SparseGraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn triangle_pendant() -> SparseGraph {
        graph(4, &[(0, 1), (1, 2), (0, 2), (2, 3)])
    }

    /// Repeatedly delete nodes of degree < k; the survivors form the k-core.
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
            for i in 0..n {
                if alive[i] {
                    core[i] = k as f64;
                }
            }
        }
        core
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_scores(&graph(4, &[(0, 1), (0, 2), (0, 3)])).values, vec![3.0, 1.0, 1.0, 1.0]);
        assert_eq!(degree_scores(&SparseGraph::empty(3)).values, vec![0.0; 3]);
        assert_eq!(degree_scores(&triangle_pendant()).values, vec![2.0, 2.0, 3.0, 1.0]);
    }

    #[test]
    fn pagerank_examples() {
        let tri = pagerank_scores(&graph(3, &[(0, 1), (1, 2), (0, 2)]), 0.85, 1e-12).unwrap();
        assert!(tri.values.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        let star = pagerank_scores(&graph(4, &[(0, 1), (0, 2), (0, 3)]), 0.85, 1e-12).unwrap();
        // hand solution: c = 0.0375 + 2.55 l, l = 0.0375 + 0.85 c / 3
        let c = 0.133_125 / 0.2775;
        let l = 0.0375 + 0.85 * c / 3.0;
        assert!((star.values[0] - c).abs() < 1e-10);
        assert!((star.values[0] - 0.47973).abs() < 1e-5);
        assert!((star.values[1] - 0.17342).abs() < 1e-5);
        assert!((star.values[3] - l).abs() < 1e-10);
        let edge = pagerank_scores(&graph(2, &[(0, 1)]), 0.85, 1e-12).unwrap();
        assert_eq!(edge.values, vec![0.5, 0.5]);
        assert!(pagerank_scores(&edge_graph(), 1.0, 1e-9).is_err());
    }

    fn edge_graph() -> SparseGraph {
        graph(2, &[(0, 1)])
    }

    #[test]
    fn pagerank_with_isolated_nodes() {
        let g = graph(5, &[(0, 1), (1, 2)]);
        let pr = pagerank_scores(&g, 0.85, 1e-13).unwrap();
        assert!((pr.values.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(pr.values.iter().all(|&v| v > 0.0));
        assert!((pr.values[3] - pr.values[4]).abs() < 1e-15);
        // direct check of the fixed-point equation
        let n = 5.0;
        let dangling = pr.values[3] + pr.values[4];
        let base = 0.15 / n + 0.85 * dangling / n;
        assert!((pr.values[1] - (base + 0.85 * (pr.values[0] + pr.values[2]))).abs() < 1e-11);
    }

    #[test]
    fn pagerank_reports_non_convergence() {
        let g = sample_adjacency(&ProbabilityMatrix::from_fn(30, |_, _| 0.2), 1);
        let err = pagerank_scores(&g, 0.85, 0.0).unwrap_err();
        assert!(matches!(err, CorexError::Convergence { .. }));
    }

    #[test]
    fn eigenvector_examples() {
        let s = 3f64.sqrt().recip();
        let tri = eigenvector_scores(&graph(3, &[(0, 1), (1, 2), (0, 2)]), 1e-12).unwrap();
        assert!(tri.values.iter().all(|v| (v - s).abs() < 1e-12));
        let e = eigenvector_scores(&edge_graph(), 1e-12).unwrap();
        assert!(e.values.iter().all(|v| (v - 0.5f64.sqrt()).abs() < 1e-12));
        let p3 = eigenvector_scores(&graph(3, &[(0, 1), (1, 2)]), 1e-13).unwrap();
        assert!((p3.values[0] - 0.5).abs() < 1e-10);
        assert!((p3.values[1] - 0.5f64.sqrt()).abs() < 1e-10);
        assert!(eigenvector_scores(&SparseGraph::empty(3), 1e-12).is_err());
    }

    #[test]
    fn eigenvector_matches_dense_solver() {
        let g = sample_adjacency(&ProbabilityMatrix::from_fn(60, |_, _| 0.15), 5);
        let eig = nalgebra::SymmetricEigen::new(g.to_dense());
        let top = eig.eigenvalues.imax();
        let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let got = eigenvector_scores(&g, 1e-13).unwrap();
        for (a, b) in got.values.iter().zip(&v) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn local_cc_examples() {
        assert_eq!(local_cc_scores(&graph(3, &[(0, 1), (1, 2), (0, 2)])).values, vec![1.0; 3]);
        assert_eq!(local_cc_scores(&graph(3, &[(0, 1), (1, 2)])).values, vec![0.0; 3]);
        // K4 without edge (2,3): nodes 0 and 1 have degree 3 and two triangles
        let k4m = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        let cc = local_cc_scores(&k4m).values;
        assert!((cc[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((cc[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cc[2], 1.0);
        assert_eq!(cc[3], 1.0);
    }

    #[test]
    fn coreness_examples() {
        assert_eq!(coreness_scores(&triangle_pendant()).values, vec![2.0, 2.0, 2.0, 1.0]);
        let tree = graph(6, &[(0, 1), (0, 2), (1, 3), (1, 4), (4, 5)]);
        assert_eq!(coreness_scores(&tree).values, vec![1.0; 6]);
        let k5: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        assert_eq!(coreness_scores(&graph(5, &k5)).values, vec![4.0; 5]);
        assert_eq!(coreness_scores(&SparseGraph::empty(2)).values, vec![0.0; 2]);
    }

    proptest! {
        #[test]
        fn coreness_matches_brute_force(n in 1usize..30, p in 0.05f64..0.6, seed in 0u64..10_000) {
            let g = sample_adjacency(&ProbabilityMatrix::from_fn(n, |_, _| p), seed);
            prop_assert_eq!(coreness_scores(&g).values, brute_coreness(&g));
        }

        #[test]
        fn baselines_are_permutation_equivariant(n in 2usize..25, seed in 0u64..10_000) {
            let g = sample_adjacency(&ProbabilityMatrix::from_fn(n, |_, _| 0.3), seed);
            let perm: Vec<usize> = (0..n).rev().collect();
            let h = g.permuted(&perm);
            for m in [BaselineMethod::Degree, BaselineMethod::LocalCc, BaselineMethod::Coreness, BaselineMethod::Pagerank] {
                let a = m.score(&g).unwrap().values;
                let b = m.score(&h).unwrap().values;
                for i in 0..n {
                    prop_assert!((a[i] - b[perm[i]]).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn pagerank_sums_to_one(n in 1usize..40, p in 0.0f64..0.5, seed in 0u64..10_000) {
            let g = sample_adjacency(&ProbabilityMatrix::from_fn(n, |_, _| p), seed);
            let pr = pagerank_scores(&g, 0.85, 1e-12).unwrap();
            prop_assert!((pr.values.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(pr.values.iter().all(|&v| v > 0.0));
        }
    }
}
