//! Undirected binary graphs, dense edge-probability matrices and Bernoulli
//! sampling between the two.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{CorexError, Result};
use crate::rng::{derive_seed, stream_rng, tag};

/// Symmetric, loop-free, binary adjacency stored as sorted neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl SparseGraph {
    /// Builds a graph from unordered pairs. Duplicates and reversed pairs are
    /// merged; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (idx, (a, b)) in edges.into_iter().enumerate() {
            if a == b {
                return Err(CorexError::SelfLoop { line: idx + 1, node: a });
            }
            let id = a.max(b);
            if id >= n {
                return Err(CorexError::NodeOutOfRange { line: idx + 1, id, n });
            }
            rows[a].push(b);
            rows[b].push(a);
        }
        Ok(Self::from_rows(rows))
    }

    fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            targets.extend_from_slice(row);
            offsets.push(targets.len());
        }
        SparseGraph { offsets, targets }
    }

    pub fn empty(n: usize) -> Self {
        SparseGraph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n());
        let mut rows = vec![Vec::new(); self.n()];
        for i in 0..self.n() {
            rows[perm[i]] = self.neighbors(i).iter().map(|&j| perm[j]).collect();
        }
        Self::from_rows(rows)
    }

    /// Dense 0/1 adjacency; test and small-instance helper.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for &j in self.neighbors(i) {
                a[(i, j)] = 1.0;
            }
        }
        a
    }
}

/// Dense symmetric matrix of edge probabilities with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMatrix {
    entries: DMatrix<f64>,
}

impl ProbabilityMatrix {
    /// Validates symmetry, range and the zero diagonal.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(CorexError::domain("probability matrix must be square"));
        }
        for j in 0..n {
            if entries[(j, j)] != 0.0 {
                return Err(CorexError::domain(format!("nonzero diagonal at {j}")));
            }
            for i in 0..n {
                let v = entries[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(CorexError::domain(format!("entry ({i},{j}) = {v} outside [0,1]")));
                }
                if v != entries[(j, i)] {
                    return Err(CorexError::domain(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(ProbabilityMatrix { entries })
    }

    /// Fills the upper triangle from `f(i, j)` (`i < j`) and mirrors it.
    /// Values are clamped to [0,1].
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..j {
                let v = f(i, j).clamp(0.0, 1.0);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        ProbabilityMatrix { entries }
    }

    /// Wraps a matrix the caller already knows to satisfy the invariants.
    pub(crate) fn from_trusted(entries: DMatrix<f64>) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        ProbabilityMatrix { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Expected degrees `sum_j P_ij`.
    pub fn expected_degrees(&self) -> DegreeVector {
        // column sums equal row sums by symmetry and are contiguous in memory
        DegreeVector::new(self.entries.column_iter().map(|c| c.sum()).collect())
    }

    /// Mean off-diagonal entry.
    pub fn mean_density(&self) -> f64 {
        let n = self.n() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.entries.sum() / (n * n - n)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.max()
    }
}

/// Per-node degrees, observed counts or expected values.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeVector(Vec<f64>);

impl DegreeVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|&v| v >= 0.0));
        DegreeVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn degrees(g: &SparseGraph) -> DegreeVector {
    DegreeVector((0..g.n()).map(|i| g.degree(i) as f64).collect())
}

/// Plug-in edge density `2m / (n^2 - n)`.
pub fn average_density(g: &SparseGraph) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(CorexError::domain("average density needs at least two nodes"));
    }
    let n = n as f64;
    Ok(2.0 * g.m() as f64 / (n * n - n))
}

/// Draws `A_ij ~ Bernoulli(P_ij)` independently for `i < j`.
///
/// Row `i` consumes its own ChaCha stream, so the result does not depend on
/// the number of worker threads.
pub fn sample_adjacency(p: &ProbabilityMatrix, seed: u64) -> SparseGraph {
    let n = p.n();
    let key = derive_seed(seed, &[tag::ADJACENCY]);
    let m = p.matrix();
    let upper: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(key, i as u64);
            // column i holds P_ji = P_ij contiguously
            let col = m.column(i);
            ((i + 1)..n)
                .filter(|&j| rng.gen::<f64>() < col[j])
                .collect()
        })
        .collect();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in upper.into_iter().enumerate() {
        for j in row {
            rows[i].push(j);
            rows[j].push(i);
        }
    }
    SparseGraph::from_rows(rows)
}

/// Options for reading whitespace-separated edge lists.
#[derive(Clone, Copy, Debug)]
pub struct EdgeListDialect {
    pub comment: char,
    pub one_based: bool,
}

impl Default for EdgeListDialect {
    fn default() -> Self {
        EdgeListDialect {
            comment: '#',
            one_based: false,
        }
    }
}

/// Reads an edge list: one `i j` pair per line, `#` comments, and an
/// optional leading `n <count>` header fixing the node count.
pub fn load_edge_list<R: BufRead>(source: R, dialect: EdgeListDialect) -> Result<SparseGraph> {
    let mut declared: Option<usize> = None;
    let mut seen_data = false;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut max_id = None;

    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let body = line.split(dialect.comment).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !seen_data && declared.is_none() && fields[0] == "n" {
            if fields.len() != 2 {
                return Err(CorexError::Parse {
                    line: lineno,
                    message: "header must be `n <count>`".into(),
                });
            }
            let count = fields[1].parse::<usize>().map_err(|e| CorexError::Parse {
                line: lineno,
                message: format!("bad node count `{}`: {e}", fields[1]),
            })?;
            declared = Some(count);
            continue;
        }
        seen_data = true;
        if fields.len() != 2 {
            return Err(CorexError::Parse {
                line: lineno,
                message: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let mut ids = [0usize; 2];
        for (slot, f) in ids.iter_mut().zip(&fields) {
            let raw = f.parse::<usize>().map_err(|e| CorexError::Parse {
                line: lineno,
                message: format!("bad node id `{f}`: {e}"),
            })?;
            *slot = if dialect.one_based {
                raw.checked_sub(1).ok_or_else(|| CorexError::Parse {
                    line: lineno,
                    message: "node id 0 in a one-based edge list".into(),
                })?
            } else {
                raw
            };
        }
        let [a, b] = ids;
        if a == b {
            return Err(CorexError::SelfLoop { line: lineno, node: a });
        }
        if let Some(n) = declared {
            let id = a.max(b);
            if id >= n {
                return Err(CorexError::NodeOutOfRange { line: lineno, id, n });
            }
        }
        max_id = Some(max_id.map_or(a.max(b), |m: usize| m.max(a).max(b)));
        pairs.push((lineno, a, b));
    }

    let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (_, a, b) in pairs {
        rows[a].push(b);
        rows[b].push(a);
    }
    Ok(SparseGraph::from_rows(rows))
}

/// Writes the `n <count>` header followed by one tab-separated `i j` line per edge.
pub fn write_edge_list<W: Write>(g: &SparseGraph, mut out: W) -> Result<()> {
    writeln!(out, "n {}", g.n())?;
    for (i, j) in g.edges() {
        writeln!(out, "{i}\t{j}")?;
    }
    Ok(())
}
