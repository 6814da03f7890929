//! Non-overlapping community partitions of the social graph.
//!
//! Detectors implement [`CommunityDetector`] and are looked up by name in a
//! [`DetectorRegistry`]; the built-ins are `louvain`, `labelprop` and `file`
//! (an externally computed partition, e.g. from Infomap or SLM).

mod labelprop;
mod louvain;
mod partition;
mod registry;

pub use self::labelprop::{label_propagation, LabelPropagation};
pub use self::louvain::{louvain, louvain_with_trace, Louvain, LouvainOutcome};
pub use self::partition::{load_partition, modularity, read_partition, CommunityId, Partition};
pub use self::registry::{CommunityDetector, DetectorOptions, DetectorRegistry, FileDetector};
