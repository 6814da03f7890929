//! Repost-cascade reconstruction, structural-diversity measurements and
//! imbalanced viral-cascade classification.
//!
//! The crate is organised as a pipeline:
//!
//! - [`graph`] builds the directed repost graph from a historical log window.
//! - [`community`] partitions that graph through a registry of detectors.
//! - [`cascade`] rebuilds cascades and takes size- or time-based snapshots.
//! - [`features`] turns snapshots into diversity measurements and feature groups.
//! - [`stats`] runs the viral/non-viral distribution study.
//! - [`ml`] holds SMOTE, the random forest and the cross-validation harness.
//! - [`synth`] generates planted-community networks and simulated cascades.

pub mod cascade;
pub mod community;
pub mod error;
pub mod features;
pub mod graph;
pub mod ml;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{NodeId, SocialGraph};
