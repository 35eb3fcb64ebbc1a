use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::json::write_json;
use crate::chain::{AbSets, ChainSpec, Regime, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ulam::UlamGrid;

/// One matrix in a chain file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    /// Row-major entries, `n_states^2` of them.
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
    /// Nonzero entries only.
    Triplets { entries: Vec<(usize, usize, f64)> },
    /// CSV file, relative to the chain file. Either a dense table without a
    /// header, or `i,j,value` rows under that header.
    Path(PathBuf),
}

/// On-disk description of a chain and its sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub regime: Regime,
    pub n_states: usize,
    pub matrices: Vec<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_density: Option<Vec<f64>>,
    #[serde(rename = "set_A")]
    pub set_a: Vec<usize>,
    #[serde(rename = "set_B")]
    pub set_b: Vec<usize>,
    /// Cell geometry when the chain comes from a grid discretization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<UlamGrid>,
}

fn matrix_source(m: &Matrix) -> MatrixSource {
    if m.is_sparse() {
        MatrixSource::Triplets { entries: m.triplets() }
    } else {
        MatrixSource::Flat(m.to_dense())
    }
}

fn read_csv_matrix(path: &Path, n: usize) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut records = reader.records().peekable();
    let header = match records.peek() {
        Some(Ok(r)) => r.iter().map(|s| s.to_ascii_lowercase()).collect::<Vec<_>>(),
        _ => Vec::new(),
    };
    let bad = |e: std::num::ParseFloatError| Error::Parse(format!("{}: {e}", path.display()));
    if header == ["i", "j", "value"] {
        records.next();
        let mut rows = vec![Vec::new(); n];
        for rec in records {
            let rec = rec?;
            let parse_index = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&k| k < n)
                    .ok_or_else(|| Error::Parse(format!("{}: bad index {s:?}", path.display())))
            };
            let i = parse_index(&rec[0])?;
            let j = parse_index(&rec[1])?;
            rows[i].push((j, rec[2].parse::<f64>().map_err(bad)?));
        }
        return Ok(Matrix::from_rows(n, rows));
    }
    let mut data = Vec::with_capacity(n * n);
    let mut n_rows = 0;
    for rec in records {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::Parse(format!("{}: row {n_rows} has {} entries, expected {n}", path.display(), rec.len())));
        }
        for field in rec.iter() {
            data.push(field.parse::<f64>().map_err(bad)?);
        }
        n_rows += 1;
    }
    if n_rows != n {
        return Err(Error::Parse(format!("{}: {n_rows} rows, expected {n}", path.display())));
    }
    Ok(Matrix::from_dense(n, data))
}

impl MatrixSource {
    fn load(&self, n: usize, base: &Path) -> Result<Matrix> {
        match self {
            MatrixSource::Flat(v) if v.len() == n * n => Ok(Matrix::from_dense(n, v.clone())),
            MatrixSource::Flat(v) => Err(Error::Parse(format!("flat matrix has {} entries, expected {}", v.len(), n * n))),
            MatrixSource::Nested(rows) => match Matrix::from_nested(rows) {
                Some(m) if m.n() == n => Ok(m),
                _ => Err(Error::Parse(format!("nested matrix is not {n} x {n}"))),
            },
            MatrixSource::Triplets { entries } => {
                let mut rows = vec![Vec::new(); n];
                for &(i, j, v) in entries {
                    if i >= n || j >= n {
                        return Err(Error::Parse(format!("entry ({i}, {j}) outside a {n} x {n} matrix")));
                    }
                    rows[i].push((j, v));
                }
                Ok(Matrix::from_rows(n, rows))
            }
            MatrixSource::Path(p) => read_csv_matrix(&base.join(p), n),
        }
    }
}

impl ChainFile {
    /// Describes `spec` with every matrix written inline.
    pub fn from_spec(spec: &ChainSpec, sets: &AbSets) -> Self {
        let matrices = spec.matrices().iter().map(|p| matrix_source(p)).collect();
        let (period, horizon, initial_density) = match spec {
            ChainSpec::Stationary { .. } => (None, None, None),
            ChainSpec::Periodic { period, .. } => (Some(*period), None, None),
            ChainSpec::FiniteTime { horizon, initial_density, .. } => (None, Some(*horizon), Some(initial_density.clone())),
        };
        Self {
            regime: spec.regime(),
            n_states: spec.n_states(),
            matrices,
            period,
            horizon,
            initial_density,
            set_a: sets.a().to_vec(),
            set_b: sets.b().to_vec(),
            grid: None,
        }
    }

    pub fn with_grid(mut self, grid: UlamGrid) -> Self {
        self.grid = Some(grid);
        self
    }

    /// Builds the chain and the sets. Matrices are not validated here, so that
    /// [`crate::chain::validate_chain`] can report every problem at once.
    /// CSV paths are resolved against `base`.
    pub fn to_spec(&self, base: &Path) -> Result<(ChainSpec, AbSets)> {
        let n = self.n_states;
        if n == 0 {
            return Err(Error::Parse("n_states must be positive".into()));
        }
        let mut matrices = self
            .matrices
            .iter()
            .map(|s| s.load(n, base).map(TransitionMatrix::from_raw))
            .collect::<Result<Vec<_>>>()?;
        let spec = match self.regime {
            Regime::Stationary => {
                if matrices.len() != 1 {
                    return Err(Error::Parse(format!("stationary chain needs 1 matrix, got {}", matrices.len())));
                }
                ChainSpec::stationary(matrices.remove(0))
            }
            Regime::Periodic => {
                let period = self.period.unwrap_or(matrices.len());
                ChainSpec::Periodic { period, matrices }
            }
            Regime::Finite => {
                let initial_density = self
                    .initial_density
                    .clone()
                    .ok_or_else(|| Error::Parse("finite chain needs initial_density".into()))?;
                let horizon = self.horizon.unwrap_or(matrices.len() + 1);
                // a single matrix with a longer horizon means time-homogeneous
                if matrices.len() == 1 && horizon > 2 {
                    matrices = vec![matrices[0].clone(); horizon - 1];
                }
                ChainSpec::FiniteTime { horizon, matrices, initial_density }
            }
            Regime::Switching => return Err(Error::Parse("switching chains have no file format".into())),
        };
        let sets = AbSets::new(n, self.set_a.clone(), self.set_b.clone())?;
        Ok((spec, sets))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(File::create(path)?);
        write_json(&mut w, self)?;
        w.flush()?;
        Ok(())
    }
}

/// Reads a chain file and builds the chain, resolving paths next to the file.
pub fn load_chain(path: &Path) -> Result<(ChainFile, ChainSpec, AbSets)> {
    let file = ChainFile::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (spec, sets) = file.to_spec(base)?;
    Ok((file, spec, sets))
}
