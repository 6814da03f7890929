//! Cascade reconstruction and snapshots.

mod build;
mod snapshot;

pub use self::build::{build_cascades, jitter_times, read_cascades, write_cascades, Adoption, Cascade, CascadeSet};
pub use self::snapshot::{snapshot_by_size, snapshot_by_time, t_expose, Observation, Snapshot, DEFAULT_LAMBDA_MINUTES};
