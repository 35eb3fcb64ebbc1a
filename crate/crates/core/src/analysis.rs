//! One-call pipeline from a chain and sets to every reactive statistic.

use serde::Serialize;

use crate::chain::{density_family, stationary_distribution, AbSets, ChainSpec, DensityFamily, TransitionMatrix};
use crate::committor::{check_sets, finite_with, periodic_with, stationary_with, CommittorField, PeriodicMethod};
use crate::error::{Error, Result};
use crate::stats::{check_conservation, reactive_stats, ConservationReport, ReactiveStats};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub densities: DensityFamily,
    pub committors: CommittorField,
    pub stats: ReactiveStats,
    pub conservation: ConservationReport,
}

/// Validates `spec`, then computes densities, committors and statistics.
pub fn analyze(spec: &ChainSpec, sets: &AbSets, method: PeriodicMethod, tol: &Tolerances) -> Result<Analysis> {
    let diags = crate::chain::validate_chain(spec, tol);
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    check_sets(spec.n_states(), sets)?;
    let densities = density_family(spec, tol)?;
    let committors = match spec {
        ChainSpec::Stationary { matrix } => stationary_with(matrix, densities.at(0), sets, tol)?,
        ChainSpec::Periodic { matrices, .. } => periodic_with(matrices, &densities, sets, method, tol)?,
        ChainSpec::FiniteTime { .. } => finite_with(spec, &densities, sets, tol)?,
    };
    let stats = reactive_stats(spec, &densities, &committors, sets, tol)?;
    let conservation = check_conservation(&stats, sets);
    Ok(Analysis { densities, committors, stats, conservation })
}

/// Committor errors at the centre of the window `{-N, ..., N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub forward_error: f64,
    pub backward_error: f64,
}

/// Compares the committors at time 0 of the stationary chain restricted to
/// `{-N, ..., N}` (started in the invariant law) with the infinite-time
/// committors, in the Euclidean norm. `N = 0` leaves only the boundary values.
pub fn convergence_study(
    p: &TransitionMatrix,
    sets: &AbSets,
    n_list: &[usize],
    tol: &Tolerances,
) -> Result<Vec<ConvergencePoint>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("window sizes must be strictly increasing"));
    }
    check_sets(p.n_states(), sets)?;
    let pi = stationary_distribution(p, tol)?;
    let infinite = stationary_with(p, &pi, sets, tol)?;
    let l2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Ok(ConvergencePoint {
                    n,
                    forward_error: l2(&sets.indicator_b(), &infinite.forward[0]),
                    backward_error: l2(&sets.indicator_a(), &infinite.backward[0]),
                });
            }
            let spec = ChainSpec::finite_homogeneous(p, 2 * n + 1, pi.clone());
            let densities = density_family(&spec, tol)?;
            let field = finite_with(&spec, &densities, sets, tol)?;
            Ok(ConvergencePoint {
                n,
                forward_error: l2(&field.forward[n], &infinite.forward[0]),
                backward_error: l2(&field.backward[n], &infinite.backward[0]),
            })
        })
        .collect()
}

/// Least-squares fit of `ln y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits the points with `y > floor`; below the floor round-off dominates.
/// Needs at least three such points.
pub fn log_linear_fit(xs: &[f64], ys: &[f64], floor: f64) -> Option<LogLinearFit> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, &y)| y > floor).map(|(&x, &y)| (x, y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LogLinearFit { slope, intercept: my - slope * mx, r_squared, points: pts.len() })
}
