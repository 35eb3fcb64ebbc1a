//! File formats: chain specifications in, statistics and fields out.

mod chain_file;
mod export;
mod json;

pub use chain_file::{load_chain, ChainFile, MatrixSource};
pub use export::{
    write_committors_csv, write_stats_csv, write_stats_json, write_trajectories_csv, write_vectors_csv, Format,
};
pub use json::{format_f64, to_json_string, write_json};
