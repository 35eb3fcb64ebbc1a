#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpt_core::chain::{AbSets, ChainSpec, TransitionMatrix};
use tpt_core::linalg::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random row-stochastic matrix with a self-loop and a ring edge in every
/// row, so every product of such matrices is irreducible and aperiodic.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, extra: usize) -> TransitionMatrix {
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![(i, rng.random_range(0.05..1.0)), ((i + 1) % n, rng.random_range(0.05..1.0))];
            for _ in 0..extra {
                row.push((rng.random_range(0..n), rng.random_range(0.0..1.0)));
            }
            let total: f64 = row.iter().map(|e| e.1).sum();
            row.iter().map(|&(j, v)| (j, v / total)).collect()
        })
        .collect();
    TransitionMatrix::from_raw(Matrix::from_rows(n, rows))
}

/// Random reversible chain: a symmetric weight matrix normalized by rows.
/// Returns the chain and its invariant law.
pub fn random_reversible<R: Rng>(rng: &mut R, n: usize) -> (TransitionMatrix, Vec<f64>) {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        let j = (i + 1) % n;
        let v = rng.random_range(0.1..1.0);
        w[i * n + j] += v;
        w[j * n + i] += v;
        w[i * n + i] += rng.random_range(0.0..0.5);
        let k = rng.random_range(0..n);
        let v = rng.random_range(0.0..0.5);
        w[i * n + k] += v;
        w[k * n + i] += v;
    }
    let sums: Vec<f64> = (0..n).map(|i| w[i * n..(i + 1) * n].iter().sum()).collect();
    let total: f64 = sums.iter().sum();
    let data = (0..n * n).map(|k| w[k] / sums[k / n]).collect();
    (TransitionMatrix::from_raw(Matrix::from_dense(n, data)), sums.iter().map(|s| s / total).collect())
}

/// Disjoint nonempty `A` and `B`, leaving at least one state in `C` when
/// `n >= 3`.
pub fn random_sets<R: Rng>(rng: &mut R, n: usize) -> AbSets {
    let size_a = rng.random_range(1..=(n / 3).max(1));
    let size_b = rng.random_range(1..=(n / 3).max(1));
    let picks = sample(rng, n, size_a + size_b).into_vec();
    AbSets::new(n, picks[..size_a].to_vec(), picks[size_a..].to_vec()).unwrap()
}

pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

pub fn random_stationary(seed: u64, n: usize) -> (ChainSpec, AbSets) {
    let mut r = rng(seed);
    let p = random_matrix(&mut r, n, 3);
    (ChainSpec::stationary(p), random_sets(&mut r, n))
}

pub fn random_periodic(seed: u64, n: usize, m: usize) -> (ChainSpec, AbSets) {
    let mut r = rng(seed);
    let ps = (0..m).map(|_| random_matrix(&mut r, n, 3)).collect();
    (ChainSpec::periodic(ps), random_sets(&mut r, n))
}

pub fn random_finite(seed: u64, n: usize, horizon: usize) -> (ChainSpec, AbSets) {
    let mut r = rng(seed);
    let ps = (0..horizon - 1).map(|_| random_matrix(&mut r, n, 3)).collect();
    let lambda = random_density(&mut r, n);
    (ChainSpec::finite(ps, lambda), random_sets(&mut r, n))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
