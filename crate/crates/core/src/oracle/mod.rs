//! Independent checks: path-sum enumeration and trajectory estimators.

mod enumerate;
mod estimate;
mod trajectory;

pub use enumerate::{enumerate_committor, Direction, PathBound};
pub use estimate::{ensemble_rate_estimate, ergodic_estimates, ErgodicEstimates, Estimate, DEFAULT_BATCHES};
pub use trajectory::{
    hitting_times, simulate, simulate_ensemble, simulate_trajectory, HittingTimes, TrajectorySample,
};
