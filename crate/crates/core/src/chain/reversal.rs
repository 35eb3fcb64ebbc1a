use super::{ChainSpec, DensityFamily};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `lambda(n+1)^T = lambda(n)^T P(n)` for a finite-time spec.
pub fn propagate_density(spec: &ChainSpec) -> Result<DensityFamily> {
    let ChainSpec::FiniteTime { matrices, initial_density, .. } = spec else {
        return Err(Error::precondition("density propagation applies to the finite-time regime"));
    };
    let mut densities = Vec::with_capacity(matrices.len() + 1);
    densities.push(initial_density.clone());
    for p in matrices {
        let next = p.left_mul(densities.last().unwrap());
        densities.push(next);
    }
    Ok(DensityFamily { densities })
}

/// Backward transition matrices, one per slice that has a predecessor.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversal {
    /// Slice index of `matrices[0]`: 0 for the stationary and periodic
    /// regimes, 1 for the finite regime.
    pub first_slice: usize,
    pub matrices: Vec<Matrix>,
}

impl TimeReversal {
    /// Backward matrix that maps slice `slice` to `slice - 1`.
    pub fn at(&self, slice: usize) -> Option<&Matrix> {
        slice.checked_sub(self.first_slice).and_then(|k| self.matrices.get(k))
    }
}

/// `P-_ij = d_prev_j P_prev_ji / d_cur_i`, zero rows where `d_cur_i = 0`.
pub(crate) fn reverse_one(prev: &Matrix, d_prev: &[f64], d_cur: &[f64]) -> Matrix {
    let n = prev.n();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        for (i, v) in prev.row(j) {
            if d_cur[i] > 0.0 {
                rows[i].push((j, d_prev[j] * v / d_cur[i]));
            }
        }
    }
    Matrix::from_rows(n, rows)
}

pub fn reverse_transitions(spec: &ChainSpec, densities: &DensityFamily) -> Result<TimeReversal> {
    let slices = spec.n_slices();
    if densities.n_slices() != slices {
        return Err(Error::invalid(format!(
            "density family has {} slices, chain has {slices}",
            densities.n_slices()
        )));
    }
    let matrices = match spec {
        ChainSpec::Stationary { matrix } => {
            let pi = densities.at(0);
            return Ok(TimeReversal { first_slice: 0, matrices: vec![reverse_one(matrix, pi, pi)] });
        }
        ChainSpec::Periodic { matrices, .. } => {
            let m = matrices.len();
            let out = (0..m)
                .map(|k| {
                    let prev = (k + m - 1) % m;
                    reverse_one(&matrices[prev], densities.at(prev), densities.at(k))
                })
                .collect();
            return Ok(TimeReversal { first_slice: 0, matrices: out });
        }
        ChainSpec::FiniteTime { matrices, .. } => matrices,
    };
    let out = (1..slices)
        .map(|n| reverse_one(&matrices[n - 1], densities.at(n - 1), densities.at(n)))
        .collect();
    Ok(TimeReversal { first_slice: 1, matrices: out })
}
