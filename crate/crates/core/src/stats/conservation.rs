use serde::Serialize;

use super::ReactiveStats;
use crate::chain::{AbSets, Regime};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    /// Max over transition-region nodes and slices of |outflow(n) - inflow(n-1)|.
    pub node_violation: f64,
    /// |total A-outflow - total B-inflow| over the period or window.
    pub boundary_violation: f64,
}

impl ConservationReport {
    pub fn max_violation(&self) -> f64 {
        self.node_violation.max(self.boundary_violation)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

fn outflow(f: &Matrix, i: usize) -> f64 {
    f.row(i).map(|(_, v)| v).sum()
}

/// Column sums, accumulated in row order.
fn inflows(f: &Matrix) -> Vec<f64> {
    let mut acc = vec![0.0; f.n()];
    for i in 0..f.n() {
        for (j, v) in f.row(i) {
            acc[j] += v;
        }
    }
    acc
}

/// Checks current conservation at every transition-region node and the
/// balance between reactive flow leaving `A` and entering `B`.
pub fn check_conservation(stats: &ReactiveStats, sets: &AbSets) -> ConservationReport {
    let currents = &stats.current;
    let c = sets.c_states();
    let mut node: f64 = 0.0;
    match stats.regime {
        Regime::Finite => {
            // slice n has outgoing current for n <= N-2 and incoming for n >= 1
            let slices = stats.n_slices();
            let ins: Vec<Vec<f64>> = currents.iter().map(inflows).collect();
            for n in 0..slices {
                for &i in &c {
                    let out = if n < currents.len() { outflow(&currents[n], i) } else { 0.0 };
                    let inc = if n >= 1 { ins[n - 1][i] } else { 0.0 };
                    node = node.max((out - inc).abs());
                }
            }
        }
        _ => {
            let m = currents.len();
            let ins: Vec<Vec<f64>> = currents.iter().map(inflows).collect();
            for n in 0..m {
                let prev = (n + m - 1) % m;
                for &i in &c {
                    node = node.max((outflow(&currents[n], i) - ins[prev][i]).abs());
                }
            }
        }
    }
    let total = |x: &[Option<f64>]| x.iter().flatten().fold(0.0, |a, b| a + b);
    let boundary = (total(&stats.rates.out_of_a) - total(&stats.rates.into_b)).abs();
    ConservationReport { node_violation: node, boundary_violation: boundary }
}
