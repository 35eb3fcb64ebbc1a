//! Square matrices with dense or compressed-row storage.
//!
//! Storage is picked from the fill ratio at construction time. Every read
//! goes through [`Matrix::row`], which yields the nonzero entries of a row in
//! ascending column order for both layouts, so products and reductions give
//! bitwise identical results regardless of the layout chosen.

mod solve;

pub use solve::{solve_dominant, SparseRows};

/// Below this fill ratio a matrix is stored in compressed-row form.
const SPARSE_FILL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse { row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    storage: Storage,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self::from_rows(n, vec![Vec::new(); n])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    /// Builds a matrix from row-major dense data of length `n * n`.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "dense data must have n*n entries");
        let nnz = data.iter().filter(|v| **v != 0.0).count();
        if (nnz as f64) < SPARSE_FILL * (n * n) as f64 {
            let rows = (0..n)
                .map(|i| {
                    data[i * n..(i + 1) * n]
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(j, v)| (j, *v))
                        .collect()
                })
                .collect();
            Self::sparse_from_sorted(n, rows)
        } else {
            Self { n, storage: Storage::Dense(data) }
        }
    }

    /// Builds a matrix from per-row entry lists. Entries may come in any order;
    /// duplicates are summed and explicit zeros dropped.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "need one entry list per row");
        let mut nnz = 0usize;
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                assert!(j < n, "column index {j} out of range for n = {n}");
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            nnz += merged.len();
            *row = merged;
        }
        if (nnz as f64) < SPARSE_FILL * (n * n) as f64 {
            Self::sparse_from_sorted(n, rows)
        } else {
            let mut data = vec![0.0; n * n];
            for (i, row) in rows.iter().enumerate() {
                for &(j, v) in row {
                    data[i * n + j] = v;
                }
            }
            Self { n, storage: Storage::Dense(data) }
        }
    }

    /// Builds a matrix from nested rows (`rows[i][j]`).
    pub fn from_nested(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self::from_dense(n, rows.iter().flatten().copied().collect()))
    }

    fn sparse_from_sorted(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { n, storage: Storage::Sparse { row_ptr, cols, vals } }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| **v != 0.0).count(),
            Storage::Sparse { vals, .. } => vals.len(),
        }
    }

    /// Nonzero entries of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> RowIter<'_> {
        match &self.storage {
            Storage::Dense(d) => RowIter::Dense { row: &d[i * self.n..(i + 1) * self.n], j: 0 },
            Storage::Sparse { row_ptr, cols, vals } => {
                let (a, b) = (row_ptr[i], row_ptr[i + 1]);
                RowIter::Sparse { cols: &cols[a..b], vals: &vals[a..b], k: 0 }
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Sparse { row_ptr, cols, vals } => {
                let (a, b) = (row_ptr[i], row_ptr[i + 1]);
                match cols[a..b].binary_search(&j) {
                    Ok(k) => vals[a + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i * self.n + j] = v;
            }
        }
        out
    }

    /// `xᵀ M` for a row vector `x`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += xi * v;
            }
        }
        y
    }

    /// `M x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut rows = Vec::with_capacity(n);
        let mut acc = vec![0.0; n];
        let mut touched = vec![false; n];
        let mut support: Vec<usize> = Vec::new();
        for i in 0..n {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        support.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            support.sort_unstable();
            let row: Vec<(usize, f64)> = support.iter().map(|&j| (j, acc[j])).collect();
            for &j in &support {
                acc[j] = 0.0;
                touched[j] = false;
            }
            support.clear();
            rows.push(row);
        }
        Matrix::from_rows(n, rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Matrix::from_rows(self.n, rows)
    }

    /// Applies `f(i, j, value)` to every stored nonzero, keeping the layout rule.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Matrix {
        let rows = (0..self.n).map(|i| self.row(i).map(|(j, v)| (j, f(i, j, v))).collect()).collect();
        Matrix::from_rows(self.n, rows)
    }

    /// Nonzero entries as `(i, j, value)` triples in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        let (a, b) = (self.to_dense(), other.to_dense());
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Support graph adjacency: for each row, the columns with positive entries.
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.row(i).filter(|e| e.1 > 0.0).map(|e| e.0).collect()).collect()
    }
}

pub enum RowIter<'a> {
    Dense { row: &'a [f64], j: usize },
    Sparse { cols: &'a [usize], vals: &'a [f64], k: usize },
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Dense { row, j } => {
                while *j < row.len() {
                    let k = *j;
                    *j += 1;
                    if row[k] != 0.0 {
                        return Some((k, row[k]));
                    }
                }
                None
            }
            RowIter::Sparse { cols, vals, k } => {
                let out = cols.get(*k).map(|&c| (c, vals[*k]));
                *k += 1;
                out
            }
        }
    }
}

/// True if every node reaches every other node along positive entries.
///
/// Uses one forward and one backward breadth-first sweep from node 0, which
/// decides strong connectivity exactly in `O(n + nnz)`.
pub fn strongly_connected(adjacency: &[Vec<usize>]) -> bool {
    let n = adjacency.len();
    if n == 0 {
        return false;
    }
    let mut reverse = vec![Vec::new(); n];
    for (i, out) in adjacency.iter().enumerate() {
        for &j in out {
            reverse[j].push(i);
        }
    }
    reach_all(adjacency, 0) && reach_all(&reverse, 0)
}

fn reach_all(adjacency: &[Vec<usize>], start: usize) -> bool {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for &j in &adjacency[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Nodes from which at least one node in `targets` is reachable.
pub fn can_reach(adjacency: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let n = adjacency.len();
    let mut reverse = vec![Vec::new(); n];
    for (i, out) in adjacency.iter().enumerate() {
        for &j in out {
            reverse[j].push(i);
        }
    }
    let mut seen = targets.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&i| targets[i]).collect();
    while let Some(i) = stack.pop() {
        for &j in &reverse[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Strongly connected components (Kosaraju, iterative). Returns the
/// component id of every node and the number of components.
pub fn strong_components(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adjacency.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((i, next)) = stack.pop() {
            if let Some(&j) = adjacency[i].get(next) {
                stack.push((i, next + 1));
                if !seen[j] {
                    seen[j] = true;
                    stack.push((j, 0));
                }
            } else {
                order.push(i);
            }
        }
    }
    let mut reverse = vec![Vec::new(); n];
    for (i, out) in adjacency.iter().enumerate() {
        for &j in out {
            reverse[j].push(i);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = count;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for &j in &reverse[i] {
                if comp[j] == usize::MAX {
                    comp[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
