//! Markov chains in the stationary, periodic and finite-time regimes.

mod reversal;
mod stationary;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

pub(crate) use reversal::reverse_one;
pub use reversal::{propagate_density, reverse_transitions, TimeReversal};
pub use stationary::{
    is_irreducible, period_product, periodic_stationary_family, stationary_distribution,
    stationary_residual,
};
pub use validate::{validate_chain, Diagnostic, DiagnosticKind};

/// A row-stochastic matrix describing one time step of the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(Matrix);

impl TransitionMatrix {
    /// Wraps `matrix` after checking nonnegativity and row sums.
    pub fn new(matrix: Matrix, tol: &Tolerances) -> Result<Self> {
        let diags = validate::matrix_diagnostics(&matrix, None, tol);
        if diags.is_empty() {
            Ok(Self(matrix))
        } else {
            Err(Error::Validation(diags))
        }
    }

    /// Wraps `matrix` without any check. Use [`validate_chain`] before solving.
    pub fn from_raw(matrix: Matrix) -> Self {
        Self(matrix)
    }

    pub fn from_nested(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_nested(rows).ok_or_else(|| Error::invalid("matrix is not square"))?;
        Self::new(m, &Tolerances::default())
    }

    pub fn n_states(&self) -> usize {
        self.0.n()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl std::ops::Deref for TransitionMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stationary,
    Periodic,
    Finite,
    /// Regime-switching dynamics; slices index regimes rather than times.
    Switching,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Stationary => "stationary",
            Regime::Periodic => "periodic",
            Regime::Finite => "finite",
            Regime::Switching => "switching",
        })
    }
}

/// The dynamics in one of the three supported regimes.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainSpec {
    Stationary { matrix: TransitionMatrix },
    /// `matrices[m]` maps time `m mod period` to `m + 1`.
    Periodic { period: usize, matrices: Vec<TransitionMatrix> },
    /// Times `0..horizon`; `matrices[n]` maps time `n` to `n + 1`, so there are
    /// `horizon - 1` of them.
    FiniteTime { horizon: usize, matrices: Vec<TransitionMatrix>, initial_density: Vec<f64> },
}

impl ChainSpec {
    pub fn stationary(matrix: TransitionMatrix) -> Self {
        ChainSpec::Stationary { matrix }
    }

    pub fn periodic(matrices: Vec<TransitionMatrix>) -> Self {
        ChainSpec::Periodic { period: matrices.len(), matrices }
    }

    pub fn finite(matrices: Vec<TransitionMatrix>, initial_density: Vec<f64>) -> Self {
        ChainSpec::FiniteTime { horizon: matrices.len() + 1, matrices, initial_density }
    }

    /// Finite window of `horizon` times driven by a single matrix.
    pub fn finite_homogeneous(matrix: &TransitionMatrix, horizon: usize, initial_density: Vec<f64>) -> Self {
        let matrices = vec![matrix.clone(); horizon.saturating_sub(1)];
        ChainSpec::FiniteTime { horizon, matrices, initial_density }
    }

    pub fn regime(&self) -> Regime {
        match self {
            ChainSpec::Stationary { .. } => Regime::Stationary,
            ChainSpec::Periodic { .. } => Regime::Periodic,
            ChainSpec::FiniteTime { .. } => Regime::Finite,
        }
    }

    pub fn matrices(&self) -> &[TransitionMatrix] {
        match self {
            ChainSpec::Stationary { matrix } => std::slice::from_ref(matrix),
            ChainSpec::Periodic { matrices, .. } | ChainSpec::FiniteTime { matrices, .. } => matrices,
        }
    }

    pub fn n_states(&self) -> usize {
        self.matrices().first().map_or(0, |m| m.n_states())
    }

    /// Number of time slices carrying densities and committors:
    /// 1, the period `M`, or the horizon `N`.
    pub fn n_slices(&self) -> usize {
        match self {
            ChainSpec::Stationary { .. } => 1,
            ChainSpec::Periodic { period, .. } => *period,
            ChainSpec::FiniteTime { horizon, .. } => *horizon,
        }
    }

    /// Transition matrix applied at `slice`, if the slice has an outgoing step.
    pub fn matrix_at(&self, slice: usize) -> Option<&TransitionMatrix> {
        match self {
            ChainSpec::Stationary { matrix } => Some(matrix),
            ChainSpec::Periodic { matrices, .. } => matrices.get(slice % matrices.len().max(1)),
            ChainSpec::FiniteTime { matrices, .. } => matrices.get(slice),
        }
    }

    /// Returns `self` if [`validate_chain`] reports nothing.
    pub fn validated(self, tol: &Tolerances) -> Result<Self> {
        let diags = validate_chain(&self, tol);
        if diags.is_empty() {
            Ok(self)
        } else {
            Err(Error::Validation(diags))
        }
    }
}

/// Probability vectors indexed by time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFamily {
    pub densities: Vec<Vec<f64>>,
}

impl DensityFamily {
    pub fn at(&self, slice: usize) -> &[f64] {
        &self.densities[slice]
    }

    pub fn n_slices(&self) -> usize {
        self.densities.len()
    }
}

/// Densities matching the slicing of `spec`.
pub fn density_family(spec: &ChainSpec, tol: &Tolerances) -> Result<DensityFamily> {
    match spec {
        ChainSpec::Stationary { matrix } => Ok(DensityFamily { densities: vec![stationary_distribution(matrix, tol)?] }),
        ChainSpec::Periodic { matrices, .. } => periodic_stationary_family(matrices, tol),
        ChainSpec::FiniteTime { .. } => propagate_density(spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    A,
    B,
    C,
}

/// The source set `A`, the target set `B`, and the transition region between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbSets {
    a: Vec<usize>,
    b: Vec<usize>,
    region: Vec<Region>,
}

impl AbSets {
    /// `A` and `B` must be nonempty, disjoint and inside `0..n_states`.
    ///
    /// An empty transition region is accepted; every reactive trajectory is
    /// then a direct jump from `A` to `B`.
    pub fn new(n_states: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("sets A and B must be nonempty"));
        }
        let mut region = vec![Region::C; n_states];
        for (set, tag) in [(&a, Region::A), (&b, Region::B)] {
            for &i in set.iter() {
                if i >= n_states {
                    return Err(Error::invalid(format!("state {i} outside 0..{n_states}")));
                }
                if region[i] != Region::C && region[i] != tag {
                    return Err(Error::invalid(format!("state {i} is in both A and B")));
                }
                region[i] = tag;
            }
        }
        let mut a = a;
        let mut b = b;
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        Ok(Self { a, b, region })
    }

    pub fn n_states(&self) -> usize {
        self.region.len()
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn region(&self, i: usize) -> Region {
        self.region[i]
    }

    pub fn in_a(&self, i: usize) -> bool {
        self.region[i] == Region::A
    }

    pub fn in_b(&self, i: usize) -> bool {
        self.region[i] == Region::B
    }

    pub fn in_c(&self, i: usize) -> bool {
        self.region[i] == Region::C
    }

    /// States of the transition region in ascending order.
    pub fn c_states(&self) -> Vec<usize> {
        (0..self.region.len()).filter(|&i| self.in_c(i)).collect()
    }

    pub fn indicator_a(&self) -> Vec<f64> {
        self.region.iter().map(|r| if *r == Region::A { 1.0 } else { 0.0 }).collect()
    }

    pub fn indicator_b(&self) -> Vec<f64> {
        self.region.iter().map(|r| if *r == Region::B { 1.0 } else { 0.0 }).collect()
    }
}
