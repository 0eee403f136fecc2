//! Weighted dependency digraphs and their Laplacians.
//!
//! An arc `i → j` with weight `w` means that agent `i` adjusts towards agent
//! `j` with intensity `w`. Indices are 0-based in memory and 1-based in the
//! JSON graph format.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

/// A weighted arc: agent `tail` depends on agent `head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

/// Dependency digraph of a multi-agent system.
///
/// Invariants: no self-loops, at most one arc per ordered pair, every weight
/// finite and strictly positive. Arcs are kept sorted by `(tail, head)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    arcs: Vec<Arc>,
}

impl WeightedDigraph {
    pub fn new(n: usize, mut arcs: Vec<Arc>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be at least 1".into()));
        }
        let mut seen = HashSet::with_capacity(arcs.len());
        for a in &arcs {
            if a.tail >= n || a.head >= n {
                return Err(Error::InvalidGraph(format!(
                    "arc {} -> {} out of range for n = {n}",
                    a.tail + 1,
                    a.head + 1
                )));
            }
            if a.tail == a.head {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", a.tail + 1)));
            }
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "arc {} -> {} has nonpositive or non-finite weight {}",
                    a.tail + 1,
                    a.head + 1,
                    a.weight
                )));
            }
            if !seen.insert((a.tail, a.head)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate arc {} -> {}",
                    a.tail + 1,
                    a.head + 1
                )));
            }
        }
        arcs.sort_by_key(|a| (a.tail, a.head));
        Ok(Self { n, arcs })
    }

    /// Digraph with no arcs.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Reads the digraph of a dependency matrix `A`: arc `(i, j)` with weight
    /// `a_ij` for every positive off-diagonal entry. Diagonal entries are
    /// ignored since `a_ii (x_i − x_i)` vanishes.
    pub fn from_dependency_matrix(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidDependencyMatrix(format!(
                "matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = a[(i, j)];
                if !w.is_finite() {
                    return Err(Error::InvalidDependencyMatrix(format!(
                        "entry ({}, {}) is not finite",
                        i + 1,
                        j + 1
                    )));
                }
                if w < 0.0 {
                    return Err(Error::InvalidDependencyMatrix(format!(
                        "entry ({}, {}) = {w} is negative",
                        i + 1,
                        j + 1
                    )));
                }
                if i != j && w > 0.0 {
                    arcs.push(Arc { tail: i, head: j, weight: w });
                }
            }
        }
        Self::new(n, arcs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Out-arcs of `v`, i.e. the agents `v` depends on.
    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = &Arc> {
        let start = self.arcs.partition_point(|a| a.tail < v);
        self.arcs[start..].iter().take_while(move |a| a.tail == v)
    }

    /// The dependency matrix `A` with zero diagonal.
    pub fn dependency_matrix(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for arc in &self.arcs {
            a[(arc.tail, arc.head)] = arc.weight;
        }
        a
    }

    /// `L = diag(A·1) − A`.
    ///
    /// The diagonal entry of each row is the negated sum of that row's
    /// off-diagonal entries, accumulated in column order, so adding the
    /// off-diagonal entries and then the diagonal gives exactly zero.
    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.n, self.n);
        for arc in &self.arcs {
            l[(arc.tail, arc.head)] = -arc.weight;
        }
        for i in 0..self.n {
            let off: f64 = (0..self.n).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
            // avoid a negative zero on rows without arcs
            l[(i, i)] = if off == 0.0 { 0.0 } else { -off };
        }
        l
    }

    /// True iff some vertex `r` is reachable from every vertex, i.e. the
    /// digraph contains a spanning converging tree.
    pub fn has_spanning_in_tree(&self) -> bool {
        self.in_tree_root().is_some()
    }

    /// A root of a spanning in-tree, if one exists.
    pub fn in_tree_root(&self) -> Option<usize> {
        // Reversed adjacency: r reaches v here iff v reaches r in the digraph.
        let mut rev = vec![Vec::new(); self.n];
        for a in &self.arcs {
            rev[a.head].push(a.tail);
        }
        // Mother-vertex search: the last DFS root started is the only candidate.
        let mut visited = vec![false; self.n];
        let mut candidate = 0;
        for s in 0..self.n {
            if !visited[s] {
                candidate = s;
                mark_reachable(&rev, s, &mut visited);
            }
        }
        let mut check = vec![false; self.n];
        mark_reachable(&rev, candidate, &mut check);
        check.iter().all(|&b| b).then_some(candidate)
    }

    /// Random digraph: each ordered pair `(i, j)`, `i ≠ j`, carries an arc with
    /// probability `arc_probability`, weight uniform in
    /// `[weight_low, weight_high]`. Deterministic for a fixed seed.
    pub fn random(
        n: usize,
        arc_probability: f64,
        weight_low: f64,
        weight_high: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&arc_probability) {
            return Err(Error::InvalidParameter(format!(
                "arc probability {arc_probability} outside [0, 1]"
            )));
        }
        if !(weight_low > 0.0 && weight_low <= weight_high && weight_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight range [{weight_low}, {weight_high}] must satisfy 0 < low <= high"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if rng.random_bool(arc_probability) {
                    let weight = if weight_low == weight_high {
                        weight_low
                    } else {
                        rng.random_range(weight_low..=weight_high)
                    };
                    arcs.push(Arc { tail: i, head: j, weight });
                }
            }
        }
        Self::new(n, arcs)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph serializes")
    }
}

fn mark_reachable(adj: &[Vec<usize>], start: usize, visited: &mut [bool]) {
    let mut stack = vec![start];
    visited[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                stack.push(v);
            }
        }
    }
}

/// On-disk graph format: `{"n": 3, "arcs": [{"from": 1, "to": 2, "w": 1.0}]}`
/// with 1-based vertex indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub arcs: Vec<ArcRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcRecord {
    pub from: usize,
    pub to: usize,
    pub w: f64,
}

impl TryFrom<GraphFile> for WeightedDigraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let mut arcs = Vec::with_capacity(file.arcs.len());
        for (k, rec) in file.arcs.iter().enumerate() {
            if rec.from == 0 || rec.to == 0 || rec.from > file.n || rec.to > file.n {
                return Err(Error::InvalidGraph(format!(
                    "arcs[{k}]: vertex indices ({}, {}) must lie in 1..={}",
                    rec.from, rec.to, file.n
                )));
            }
            arcs.push(Arc { tail: rec.from - 1, head: rec.to - 1, weight: rec.w });
        }
        WeightedDigraph::new(file.n, arcs)
    }
}

impl From<&WeightedDigraph> for GraphFile {
    fn from(g: &WeightedDigraph) -> Self {
        GraphFile {
            n: g.n,
            arcs: g
                .arcs
                .iter()
                .map(|a| ArcRecord { from: a.tail + 1, to: a.head + 1, w: a.weight })
                .collect(),
        }
    }
}
