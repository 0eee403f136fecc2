//! Brute-force spanning in-forest enumeration.
//!
//! A spanning in-forest is an arc subset in which every vertex has at most one
//! out-arc and there is no directed cycle; every tree converges to the vertex
//! with no out-arc. Summing forest weights grouped by size gives the
//! parametric forest matrix `(I + τL)⁻¹` and the matrix of maximum in-forests
//! `J̄` combinatorially, independent of any matrix factorization.
//!
//! Enumeration is exponential and guarded by [`MAX_ORACLE_VERTICES`].

use crate::error::{Error, Result};
use crate::graph::{Arc, WeightedDigraph};
use crate::Matrix;

pub const MAX_ORACLE_VERTICES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct InForest {
    pub arcs: Vec<Arc>,
    /// `root_of[v]` is the root of the tree containing `v`.
    pub root_of: Vec<usize>,
    /// Product of arc weights; 1 for the empty forest.
    pub weight: f64,
}

impl InForest {
    pub fn size(&self) -> usize {
        self.arcs.len()
    }
}

fn check_size(g: &WeightedDigraph) -> Result<()> {
    if g.n() > MAX_ORACLE_VERTICES {
        return Err(Error::OracleTooLarge { n: g.n(), max: MAX_ORACLE_VERTICES });
    }
    Ok(())
}

/// Calls `visit(choice)` once per spanning in-forest, where `choice[v]` is the
/// out-arc picked by `v` (or `None` for a root).
fn for_each_forest(g: &WeightedDigraph, mut visit: impl FnMut(&[Option<Arc>])) {
    let out: Vec<Vec<Arc>> = (0..g.n()).map(|v| g.out_arcs(v).copied().collect()).collect();
    let mut choice: Vec<Option<Arc>> = vec![None; g.n()];
    descend(0, &out, &mut choice, &mut visit);
}

fn descend(
    v: usize,
    out: &[Vec<Arc>],
    choice: &mut Vec<Option<Arc>>,
    visit: &mut impl FnMut(&[Option<Arc>]),
) {
    if v == out.len() {
        visit(choice);
        return;
    }
    choice[v] = None;
    descend(v + 1, out, choice, visit);
    for arc in &out[v] {
        if closes_cycle(choice, v, arc.head) {
            continue;
        }
        choice[v] = Some(*arc);
        descend(v + 1, out, choice, visit);
    }
    choice[v] = None;
}

/// Vertices not yet decided have `None`, so the walk from `head` ends unless it
/// returns to `v`.
fn closes_cycle(choice: &[Option<Arc>], v: usize, head: usize) -> bool {
    let mut x = head;
    loop {
        if x == v {
            return true;
        }
        match choice[x] {
            Some(a) => x = a.head,
            None => return false,
        }
    }
}

fn roots(choice: &[Option<Arc>]) -> Vec<usize> {
    (0..choice.len())
        .map(|v| {
            let mut x = v;
            while let Some(a) = choice[x] {
                x = a.head;
            }
            x
        })
        .collect()
}

/// All spanning in-forests of `g`, including the empty one.
pub fn enumerate_in_forests(g: &WeightedDigraph) -> Result<Vec<InForest>> {
    check_size(g)?;
    let mut forests = Vec::new();
    for_each_forest(g, |choice| {
        let arcs: Vec<Arc> = choice.iter().flatten().copied().collect();
        let weight = arcs.iter().map(|a| a.weight).product();
        forests.push(InForest { arcs, root_of: roots(choice), weight });
    });
    Ok(forests)
}

/// Forest weights grouped by forest size.
///
/// `by_root[k][(i, j)]` is the total weight of size-`k` forests in which `i`
/// belongs to the tree rooted at `j`; `total[k]` is the total weight of all
/// size-`k` forests.
#[derive(Debug, Clone)]
pub struct ForestSums {
    pub by_root: Vec<Matrix>,
    pub total: Vec<f64>,
    pub count: Vec<usize>,
}

impl ForestSums {
    pub fn compute(g: &WeightedDigraph) -> Result<Self> {
        check_size(g)?;
        let n = g.n();
        let mut by_root = vec![Matrix::zeros(n, n); n];
        let mut total = vec![0.0; n];
        let mut count = vec![0usize; n];
        for_each_forest(g, |choice| {
            let size = choice.iter().flatten().count();
            let weight: f64 = choice.iter().flatten().map(|a| a.weight).product();
            for (i, r) in roots(choice).into_iter().enumerate() {
                by_root[size][(i, r)] += weight;
            }
            total[size] += weight;
            count[size] += 1;
        });
        Ok(Self { by_root, total, count })
    }

    /// Size of the maximum in-forests (`n` minus the minimum number of trees).
    pub fn max_size(&self) -> usize {
        self.count.iter().rposition(|&c| c > 0).expect("empty forest always exists")
    }

    pub fn max_in_forest_matrix(&self) -> Matrix {
        let k = self.max_size();
        &self.by_root[k] / self.total[k]
    }

    /// `Σ_k τ^k by_root[k] / Σ_k τ^k total[k]`, rescaled by the dominant power
    /// of `τ` to stay finite for large and small `τ`.
    pub fn parametric_forest_matrix(&self, tau: f64) -> Result<Matrix> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
        }
        let n = self.by_root[0].nrows();
        let top = self.max_size();
        let scale = |k: usize| {
            if tau > 1.0 {
                tau.powi(k as i32 - top as i32)
            } else {
                tau.powi(k as i32)
            }
        };
        let mut num = Matrix::zeros(n, n);
        let mut den = 0.0;
        for k in 0..=top {
            let s = scale(k);
            num += &self.by_root[k] * s;
            den += self.total[k] * s;
        }
        Ok(num / den)
    }
}

/// Matrix of maximum in-forests `J̄`.
pub fn max_in_forest_matrix(g: &WeightedDigraph) -> Result<Matrix> {
    Ok(ForestSums::compute(g)?.max_in_forest_matrix())
}

/// Parametric forest matrix `Q(τ)`, equal to `(I + τL)⁻¹`.
pub fn parametric_forest_matrix(g: &WeightedDigraph, tau: f64) -> Result<Matrix> {
    ForestSums::compute(g)?.parametric_forest_matrix(tau)
}
