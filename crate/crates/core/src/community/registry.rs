use std::collections::BTreeMap;
use std::path::PathBuf;

use super::{label_propagation, load_partition, louvain, Partition};
use crate::error::{Error, Result};
use crate::graph::SocialGraph;

/// A community-detection strategy.
pub trait CommunityDetector: Send + Sync {
    fn name(&self) -> &str;

    fn detect(&self, g: &SocialGraph, seed: u64) -> Result<Partition>;
}

/// Knobs shared by the built-in detector factories.
#[derive(Debug, Clone)]
pub struct DetectorOptions {
    pub max_passes: usize,
    pub max_iters: usize,
    pub partition_path: Option<PathBuf>,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        Self {
            max_passes: 32,
            max_iters: 100,
            partition_path: None,
        }
    }
}

impl CommunityDetector for super::Louvain {
    fn name(&self) -> &str {
        "louvain"
    }

    fn detect(&self, g: &SocialGraph, seed: u64) -> Result<Partition> {
        Ok(louvain(g, seed, self.max_passes))
    }
}

impl CommunityDetector for super::LabelPropagation {
    fn name(&self) -> &str {
        "labelprop"
    }

    fn detect(&self, g: &SocialGraph, seed: u64) -> Result<Partition> {
        Ok(label_propagation(g, seed, self.max_iters))
    }
}

/// Imports a partition computed elsewhere.
#[derive(Debug, Clone)]
pub struct FileDetector {
    pub path: PathBuf,
}

impl CommunityDetector for FileDetector {
    fn name(&self) -> &str {
        "file"
    }

    fn detect(&self, g: &SocialGraph, _seed: u64) -> Result<Partition> {
        load_partition(&self.path, g)
    }
}

type Factory = Box<dyn Fn(&DetectorOptions) -> Result<Box<dyn CommunityDetector>> + Send + Sync>;

pub struct DetectorRegistry {
    factories: BTreeMap<String, Factory>,
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("louvain", |o| {
            Ok(Box::new(super::Louvain {
                max_passes: o.max_passes,
            }))
        });
        r.register("labelprop", |o| {
            Ok(Box::new(super::LabelPropagation { max_iters: o.max_iters }))
        });
        r.register("file", |o| {
            let path = o
                .partition_path
                .clone()
                .ok_or_else(|| Error::config("paths.partition", "required when the community method is `file`"))?;
            Ok(Box::new(FileDetector { path }))
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&DetectorOptions) -> Result<Box<dyn CommunityDetector>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, options: &DetectorOptions) -> Result<Box<dyn CommunityDetector>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: "community method",
            name: name.to_string(),
            available: self.names().join(", "),
        })?;
        factory(options)
    }
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
