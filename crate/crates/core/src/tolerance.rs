//! Numerical tolerances shared by every module.
//!
//! The defaults are the contract values; [`Tolerances`] lets callers (and the
//! CLI) override them per run.

use serde::{Deserialize, Serialize};

/// Row sums of a transition matrix must equal one within this bound.
pub const ROW_SUM: f64 = 1e-12;
/// A user supplied initial density must sum to one within this bound.
pub const INITIAL_DENSITY_SUM: f64 = 1e-12;
/// Computed density families (stationary, periodic) sum to one within this bound.
pub const DENSITY_SUM: f64 = 1e-10;
/// Max-norm residual accepted for `πᵀ = πᵀP`.
pub const STATIONARY_RESIDUAL: f64 = 1e-13;
pub const POWER_ITERATION_CAP: usize = 1_000_000;
/// Largest chain for which the dense direct stationary solver is used.
pub const DENSE_MAX_STATES: usize = 2000;
/// Committor values outside [0, 1] by less than this are clipped; larger
/// violations are errors.
pub const COMMITTOR_CLIP: f64 = 1e-10;
/// Negative current entries above `-CURRENT_CLIP` are treated as roundoff.
pub const CURRENT_CLIP: f64 = 1e-12;
/// Residual accepted for committor equations and conservation laws.
pub const EQUATION_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub row_sum: f64,
    pub initial_density_sum: f64,
    pub density_sum: f64,
    pub stationary_residual: f64,
    pub power_iteration_cap: usize,
    pub dense_max_states: usize,
    pub committor_clip: f64,
    pub current_clip: f64,
    pub equation_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            row_sum: ROW_SUM,
            initial_density_sum: INITIAL_DENSITY_SUM,
            density_sum: DENSITY_SUM,
            stationary_residual: STATIONARY_RESIDUAL,
            power_iteration_cap: POWER_ITERATION_CAP,
            dense_max_states: DENSE_MAX_STATES,
            committor_clip: COMMITTOR_CLIP,
            current_clip: CURRENT_CLIP,
            equation_residual: EQUATION_RESIDUAL,
        }
    }
}
