use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tpt_core::chain::Regime;
use tpt_core::committor::PeriodicMethod;
use tpt_core::tolerance::Tolerances;
use tpt_core::ulam::{LangevinSpec, UlamGrid, DEFAULT_SET_RADIUS};

use crate::fail::{Failure, Outcome};

/// One run of the tool. Command-line flags override the matching fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Chain specification file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<PathBuf>,
    /// Grid discretization of a diffusion, built in-process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ulam: Option<UlamConfig>,
    /// Replace the sets stored in the chain file.
    #[serde(default, rename = "set_A", skip_serializing_if = "Option::is_none")]
    pub set_a: Option<SetSpec>,
    #[serde(default, rename = "set_B", skip_serializing_if = "Option::is_none")]
    pub set_b: Option<SetSpec>,
    /// Restrict a stationary chain to the window `0..horizon`, started in
    /// its invariant law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub method: PeriodicMethod,
    /// Half-widths `N` of the windows `{-N..N}` for `converge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<usize>>,
    /// Trajectory length (stationary, periodic) or number of realizations
    /// (finite) for `simulate` and `validate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Longest enumerated path in `validate`.
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_max_len() -> usize {
    500
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            chain: None,
            ulam: None,
            set_a: None,
            set_b: None,
            horizon: None,
            method: PeriodicMethod::default(),
            windows: None,
            samples: None,
            max_len: default_max_len(),
            out: None,
            seed: 0,
            tolerances: Tolerances::default(),
            format: OutputFormat::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A set given by state indices or, on a grid, by a disk of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Indices(Vec<usize>),
    Disk { center: [f64; 2], radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlamConfig {
    #[serde(default = "UlamGrid::triple_well_default")]
    pub grid: UlamGrid,
    #[serde(flatten)]
    pub dynamics: LangevinSpec,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    /// Number of matrices per forcing period (periodic regime).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    /// Window length (finite regime).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Radius of the default disks around the deep wells.
    #[serde(default = "default_radius")]
    pub set_radius: f64,
}

fn default_regime() -> Regime {
    Regime::Stationary
}

fn default_radius() -> f64 {
    DEFAULT_SET_RADIUS
}

impl ExperimentConfig {
    /// Reads a config and makes relative paths relative to its directory.
    pub fn read(path: &Path) -> Outcome<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(c) = cfg.chain.as_mut() {
            if c.is_relative() {
                *c = base.join(&*c);
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Outcome<()> {
        match (&self.chain, &self.ulam) {
            (Some(_), Some(_)) => return Err(Failure::input("give either a chain file or an ulam descriptor, not both")),
            (None, None) => return Err(Failure::input("no chain source: pass --chain or set `chain` or `ulam`")),
            _ => {}
        }
        if let Some(c) = &self.chain {
            if !c.exists() {
                return Err(Failure::input(format!("chain file {} does not exist", c.display())));
            }
        }
        Ok(())
    }
}
