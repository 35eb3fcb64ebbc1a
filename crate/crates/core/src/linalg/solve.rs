//! Direct sparse solver for the committor systems.
//!
//! Every committor system has the form `(I - Q) x = b` with `Q` entrywise
//! nonnegative and row sums at most one, i.e. a row diagonally dominant
//! M-matrix. Schur complements of such matrices stay diagonally dominant with
//! positive pivots, so right-looking Gaussian elimination in natural order
//! needs no pivoting.

use crate::error::{Error, Result};

/// A square sparse system assembled row by row.
#[derive(Debug, Clone)]
pub struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(n: usize) -> Self {
        Self { rows: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.rows[i].push((j, v));
    }

    fn normalized(mut self) -> Vec<Vec<(usize, f64)>> {
        for row in self.rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }
        self.rows
    }
}

/// Solves `A x = b` for a diagonally dominant sparse `A`.
///
/// Fails with [`Error::Solver`] on a vanishing pivot or when the final
/// max-norm residual exceeds `residual_tol`.
pub fn solve_dominant(system: SparseRows, rhs: &[f64], residual_tol: f64) -> Result<Vec<f64>> {
    let n = system.n();
    assert_eq!(rhs.len(), n);
    let original = system.normalized();
    let mut rows = original.clone();
    let mut b = rhs.to_vec();

    // rows (below the diagonal) holding a nonzero in each column
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            if j < i {
                col_rows[j].push(i);
            }
        }
    }

    for k in 0..n {
        let pivot_row = std::mem::take(&mut rows[k]);
        let pivot = match pivot_row.first() {
            Some(&(j, v)) if j == k => v,
            _ => 0.0,
        };
        let scale = pivot_row.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
        if pivot.abs() <= 1e-14 * scale.max(1.0) {
            return Err(Error::solver(format!("vanishing pivot at row {k}"), f64::INFINITY));
        }
        let upper = &pivot_row[1..];
        let targets = std::mem::take(&mut col_rows[k]);
        for r in targets {
            let row = std::mem::take(&mut rows[r]);
            debug_assert_eq!(row.first().map(|e| e.0), Some(k));
            let factor = row[0].1 / pivot;
            b[r] -= factor * b[k];
            let mut merged = Vec::with_capacity(row.len() + upper.len());
            let (mut p, mut q) = (1usize, 0usize);
            while p < row.len() || q < upper.len() {
                let take_row = q >= upper.len() || (p < row.len() && row[p].0 < upper[q].0);
                let take_upper = p >= row.len() || (q < upper.len() && upper[q].0 < row[p].0);
                if take_row {
                    merged.push(row[p]);
                    p += 1;
                } else if take_upper {
                    let c = upper[q].0;
                    merged.push((c, -factor * upper[q].1));
                    if c < r {
                        col_rows[c].push(r);
                    }
                    q += 1;
                } else {
                    merged.push((row[p].0, row[p].1 - factor * upper[q].1));
                    p += 1;
                    q += 1;
                }
            }
            rows[r] = merged;
        }
        rows[k] = pivot_row;
    }

    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let row = &rows[k];
        let mut acc = b[k];
        for &(j, v) in &row[1..] {
            acc -= v * x[j];
        }
        x[k] = acc / row[0].1;
    }

    let residual = original
        .iter()
        .zip(rhs)
        .map(|(row, bi)| (row.iter().map(|&(j, v)| v * x[j]).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > residual_tol {
        return Err(Error::solver("sparse elimination residual above tolerance", residual));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_dominant_system() {
        // (I - Q) x = b with Q = [[0, .5, 0], [.25, 0, .25], [0, .5, 0]]
        let mut s = SparseRows::new(3);
        s.add(0, 0, 1.0);
        s.add(0, 1, -0.5);
        s.add(1, 0, -0.25);
        s.add(1, 1, 1.0);
        s.add(1, 2, -0.25);
        s.add(2, 1, -0.5);
        s.add(2, 2, 1.0);
        let x = solve_dominant(s, &[0.5, 0.0, 0.0], 1e-14).unwrap();
        // by hand: x2 = x1 / 2, x1 = 2 x0 / 7, x0 = 7 / 12
        assert!((x[0] - 7.0 / 12.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!((x[2] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn fill_in_from_cyclic_coupling() {
        // cyclic block pattern: row k couples to k+1, last row couples to 0
        let n = 6;
        let mut s = SparseRows::new(n);
        let mut dense = vec![vec![0.0; n]; n];
        for k in 0..n {
            s.add(k, k, 1.0);
            s.add(k, (k + 1) % n, -0.9);
            dense[k][k] += 1.0;
            dense[k][(k + 1) % n] -= 0.9;
        }
        let b: Vec<f64> = (0..n).map(|k| 0.1 * (k + 1) as f64).collect();
        let x = solve_dominant(s, &b, 1e-13).unwrap();
        for k in 0..n {
            let lhs: f64 = (0..n).map(|j| dense[k][j] * x[j]).sum();
            assert!((lhs - b[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let mut s = SparseRows::new(2);
        s.add(0, 0, 1.0);
        s.add(0, 1, -1.0);
        s.add(1, 0, -1.0);
        s.add(1, 1, 1.0);
        let err = solve_dominant(s, &[0.0, 0.0], 1e-12).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }));
    }
}
