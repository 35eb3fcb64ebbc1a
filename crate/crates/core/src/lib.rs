pub mod analysis;
pub mod chain;
pub mod committor;
pub mod io;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod tolerance;
pub mod ulam;
