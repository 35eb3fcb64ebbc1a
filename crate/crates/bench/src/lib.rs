//! Workloads shared by the benchmarks in `benches/`.

use tpt_core::chain::{AbSets, TransitionMatrix};
use tpt_core::linalg::Matrix;
use tpt_core::ulam::{estimate_transition_matrix, triple_well_sets, LangevinSpec, UlamGrid, DEFAULT_SET_RADIUS};

/// Banded ring chain with `2 * width + 1` neighbours per state; `phase`
/// perturbs the weights so different phases give different matrices.
pub fn banded_chain(n: usize, width: usize, phase: f64) -> TransitionMatrix {
    let rows = (0..n)
        .map(|i| {
            let raw: Vec<(usize, f64)> = (0..=2 * width)
                .map(|k| {
                    let j = (i + n + k - width) % n;
                    (j, 1.5 + ((i * 7 + k * 3) as f64 + phase).sin())
                })
                .collect();
            let total: f64 = raw.iter().map(|e| e.1).sum();
            raw.into_iter().map(|(j, v)| (j, v / total)).collect()
        })
        .collect();
    TransitionMatrix::from_raw(Matrix::from_rows(n, rows))
}

/// Sets at opposite ends of a ring of `n` states.
pub fn ring_sets(n: usize) -> AbSets {
    AbSets::new(n, vec![0, 1], vec![n / 2, n / 2 + 1]).expect("valid sets")
}

/// Triple-well chain on the default grid with `samples` points per cell.
pub fn triple_well_chain(samples: usize) -> (TransitionMatrix, AbSets) {
    let grid = UlamGrid::triple_well_default();
    let p = estimate_transition_matrix(&grid, &LangevinSpec::triple_well(1.0, 0.3, samples), 0.0, 1)
        .expect("estimate succeeds");
    (p, triple_well_sets(&grid, DEFAULT_SET_RADIUS).expect("sets fit the grid"))
}
