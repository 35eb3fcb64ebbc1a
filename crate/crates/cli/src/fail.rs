use serde::Serialize;
use tpt_core::chain::Diagnostic;
use tpt_core::error::Error;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

/// A failed run, reported as JSON on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

pub type Outcome<T> = Result<T, Failure>;

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, kind: "invalid_input".into(), message: message.into(), diagnostics: Vec::new(), residual: None }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVARIANT, kind: "invariant".into(), message: message.into(), diagnostics: Vec::new(), residual: None }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let kind = e.kind().to_string();
        match e {
            Error::Validation(diagnostics) => Self { code: EXIT_INPUT, kind, message, diagnostics, residual: None },
            Error::Solver { residual, .. } => {
                Self { code: EXIT_SOLVER, kind, message, diagnostics: Vec::new(), residual: Some(residual) }
            }
            _ => Self { code: EXIT_INPUT, kind, message, diagnostics: Vec::new(), residual: None },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::from(Error::Io(e))
    }
}
