#![allow(dead_code)]

use std::ops::RangeInclusive;

use latent_consensus::{Matrix, Vector, WeightedDigraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random digraph with `n` drawn from `sizes` and arc probability drawn from
/// `[0.1, 0.6]`, so both in-tree and forest-only instances occur.
pub fn instance(seed: u64, sizes: RangeInclusive<usize>, lo: f64, hi: f64) -> WeightedDigraph {
    let mut r = rng(seed ^ 0x5eed_0000);
    let n = r.random_range(sizes);
    let p = r.random_range(0.1..=0.6);
    WeightedDigraph::random(n, p, lo, hi, seed).unwrap()
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(n, |_, _| r.random_range(lo..=hi))
}

pub fn random_distribution(r: &mut ChaCha8Rng, n: usize) -> Vector {
    let v = random_vector(r, n, 0.0, 1.0);
    let v = if v.sum() > 0.0 { v } else { Vector::from_element(n, 1.0) };
    let s = v.sum();
    v / s
}

/// Random undirected connected weighted graph: a random spanning path plus
/// extra symmetric edges.
pub fn symmetric_connected(seed: u64, n: usize) -> WeightedDigraph {
    let mut r = rng(seed);
    let mut a = Matrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    let link = |a: &mut Matrix, i: usize, j: usize, w: f64| {
        a[(i, j)] = w;
        a[(j, i)] = w;
    };
    for k in 1..n {
        let w = r.random_range(0.5..=2.0);
        link(&mut a, order[k - 1], order[k], w);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] == 0.0 && r.random_bool(0.3) {
                let w = r.random_range(0.5..=2.0);
                link(&mut a, i, j, w);
            }
        }
    }
    WeightedDigraph::from_dependency_matrix(&a).unwrap()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.amax()
}

pub fn spread(v: &Vector) -> f64 {
    v.max() - v.min()
}
