use std::fmt;

use serde::Serialize;

use super::{is_irreducible, period_product, ChainSpec};
use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    EmptyChain,
    DimensionMismatch,
    NonFiniteEntry,
    NegativeEntry,
    RowNotStochastic,
    NotIrreducible,
    PeriodMismatch,
    HorizonTooShort,
    HorizonMismatch,
    DensityNotNormalized,
    NegativeDensity,
}

impl DiagnosticKind {
    pub fn label(self) -> &'static str {
        match self {
            DiagnosticKind::EmptyChain => "empty chain",
            DiagnosticKind::DimensionMismatch => "dimension mismatch",
            DiagnosticKind::NonFiniteEntry => "non-finite entry",
            DiagnosticKind::NegativeEntry => "negative entry",
            DiagnosticKind::RowNotStochastic => "row not stochastic",
            DiagnosticKind::NotIrreducible => "not irreducible",
            DiagnosticKind::PeriodMismatch => "period mismatch",
            DiagnosticKind::HorizonTooShort => "horizon too short",
            DiagnosticKind::HorizonMismatch => "horizon mismatch",
            DiagnosticKind::DensityNotNormalized => "density not normalized",
            DiagnosticKind::NegativeDensity => "negative density",
        }
    }
}

/// One violated invariant, located by matrix slice and state where that applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub slice: Option<usize>,
    pub state: Option<usize>,
    pub detail: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, slice: Option<usize>, state: Option<usize>, detail: String) -> Self {
        Self { kind, slice, state, detail }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.label())?;
        if let Some(s) = self.slice {
            write!(f, " [matrix {s}]")?;
        }
        if let Some(i) = self.state {
            write!(f, " [state {i}]")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Entry and row-sum checks for one matrix. Reports the first offending row of each kind.
pub(crate) fn matrix_diagnostics(m: &Matrix, slice: Option<usize>, tol: &Tolerances) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let (mut nonfinite, mut negative, mut row_sum) = (false, false, false);
    for i in 0..m.n() {
        let mut sum = 0.0;
        for (j, v) in m.row(i) {
            if !v.is_finite() && !nonfinite {
                nonfinite = true;
                out.push(Diagnostic::new(DiagnosticKind::NonFiniteEntry, slice, Some(i), format!("entry ({i},{j}) = {v}")));
            }
            if v < 0.0 && !negative {
                negative = true;
                out.push(Diagnostic::new(DiagnosticKind::NegativeEntry, slice, Some(i), format!("entry ({i},{j}) = {v}")));
            }
            sum += v;
        }
        if sum.is_finite() && (sum - 1.0).abs() > tol.row_sum && !row_sum {
            row_sum = true;
            out.push(Diagnostic::new(DiagnosticKind::RowNotStochastic, slice, Some(i), format!("row sum {sum}")));
        }
    }
    out
}

fn density_diagnostics(d: &[f64], tol: &Tolerances) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(i) = d.iter().position(|&v| !(v >= 0.0)) {
        out.push(Diagnostic::new(DiagnosticKind::NegativeDensity, None, Some(i), format!("initial density entry {}", d[i])));
    }
    let sum: f64 = d.iter().sum();
    if !((sum - 1.0).abs() <= tol.initial_density_sum) {
        out.push(Diagnostic::new(
            DiagnosticKind::DensityNotNormalized,
            None,
            None,
            format!("initial density sums to {sum}"),
        ));
    }
    out
}

/// Lists every violated invariant of `spec`. An empty list means the spec is
/// valid and, for the stationary and periodic regimes, irreducible.
pub fn validate_chain(spec: &ChainSpec, tol: &Tolerances) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let matrices = spec.matrices();
    let n = spec.n_states();
    if matrices.is_empty() || n == 0 {
        let detail = if matrices.is_empty() { "no transition matrices" } else { "zero states" };
        out.push(Diagnostic::new(DiagnosticKind::EmptyChain, None, None, detail.into()));
    }
    let mut shapes_ok = n > 0;
    for (s, m) in matrices.iter().enumerate() {
        if m.n_states() != n {
            shapes_ok = false;
            out.push(Diagnostic::new(
                DiagnosticKind::DimensionMismatch,
                Some(s),
                None,
                format!("{} states, expected {n}", m.n_states()),
            ));
        }
        out.extend(matrix_diagnostics(m, Some(s), tol));
    }
    match spec {
        ChainSpec::Stationary { .. } => {}
        ChainSpec::Periodic { period, matrices } => {
            if *period == 0 || *period != matrices.len() {
                out.push(Diagnostic::new(
                    DiagnosticKind::PeriodMismatch,
                    None,
                    None,
                    format!("period {period} with {} matrices", matrices.len()),
                ));
            }
        }
        ChainSpec::FiniteTime { horizon, matrices, initial_density } => {
            if *horizon < 2 {
                out.push(Diagnostic::new(DiagnosticKind::HorizonTooShort, None, None, format!("horizon {horizon} < 2")));
            } else if matrices.len() + 1 != *horizon {
                out.push(Diagnostic::new(
                    DiagnosticKind::HorizonMismatch,
                    None,
                    None,
                    format!("horizon {horizon} needs {} matrices, got {}", horizon - 1, matrices.len()),
                ));
            }
            if initial_density.len() != n {
                shapes_ok = false;
                out.push(Diagnostic::new(
                    DiagnosticKind::DimensionMismatch,
                    None,
                    None,
                    format!("initial density has {} entries, expected {n}", initial_density.len()),
                ));
            } else {
                out.extend(density_diagnostics(initial_density, tol));
            }
        }
    }
    if shapes_ok && out.is_empty() {
        let irreducible = match spec {
            ChainSpec::Stationary { matrix } => Some(is_irreducible(matrix)),
            ChainSpec::Periodic { matrices, .. } => Some(is_irreducible(&period_product(matrices, 0))),
            ChainSpec::FiniteTime { .. } => None,
        };
        if irreducible == Some(false) {
            let what = if spec.regime() == super::Regime::Periodic { "period product" } else { "transition matrix" };
            out.push(Diagnostic::new(
                DiagnosticKind::NotIrreducible,
                None,
                None,
                format!("support graph of the {what} is not strongly connected"),
            ));
        }
    }
    out
}
