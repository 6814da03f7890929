//! Size- and time-based snapshots.
//!
//! Exposed users are out-neighbours (in the historical graph) of the
//! snapshot's adopters that have not adopted themselves. Each exposed user's
//! exposure age is the observation time minus the adoption time of its
//! earliest-adopting exposer; ages up to `lambda` make a user *recently*
//! exposed, larger ages *past* exposed.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::build::{Adoption, Cascade};
use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};

pub const DEFAULT_LAMBDA_MINUTES: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    /// First `m` adopters; `time` is the adoption time of the m-th.
    Size { m: usize, time: f64 },
    /// Adopters up to `t` minutes after the seed.
    Time { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub adopters: Vec<Adoption>,
    pub observation: Observation,
    pub lambda: f64,
    /// Recently exposed users, sorted.
    pub recently_exposed: Vec<NodeId>,
    /// Past exposed users, sorted.
    pub past_exposed: Vec<NodeId>,
    first_exposure: HashMap<NodeId, f64>,
}

impl Snapshot {
    pub fn observed_at(&self) -> f64 {
        match self.observation {
            Observation::Size { time, .. } => time,
            Observation::Time { t } => t,
        }
    }

    pub fn adopter_ids(&self) -> Vec<NodeId> {
        self.adopters.iter().map(|a| a.node).collect()
    }

    /// Every exposed user (`F ∪ N`), sorted.
    pub fn exposed(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.first_exposure.keys().copied().collect();
        all.sort_unstable();
        all
    }

    /// Adoption time of the earliest exposer of `v`.
    pub fn earliest_exposer_time(&self, v: NodeId) -> Option<f64> {
        self.first_exposure.get(&v).copied()
    }

    pub fn t_expose(&self, v: NodeId) -> Result<f64> {
        self.earliest_exposer_time(v)
            .map(|e| self.observed_at() - e)
            .ok_or_else(|| Error::NotExposed(v.to_string()))
    }
}

/// Minutes between the earliest exposer's adoption and the observation.
pub fn t_expose(v: NodeId, snapshot: &Snapshot) -> Result<f64> {
    snapshot.t_expose(v)
}

fn split(adopters: Vec<Adoption>, observation: Observation, g: &SocialGraph, lambda: f64) -> Snapshot {
    let members: HashSet<NodeId> = adopters.iter().map(|a| a.node).collect();
    let mut first_exposure: HashMap<NodeId, f64> = HashMap::new();
    for a in &adopters {
        for &w in g.out_neighbors(a.node) {
            if !members.contains(&w) {
                let e = first_exposure.entry(w).or_insert(a.time);
                if a.time < *e {
                    *e = a.time;
                }
            }
        }
    }
    let at = match observation {
        Observation::Size { time, .. } => time,
        Observation::Time { t } => t,
    };
    let (mut recent, mut past): (Vec<NodeId>, Vec<NodeId>) = first_exposure.iter().map(|(&v, _)| v).partition(|v| at - first_exposure[v] <= lambda);
    recent.sort_unstable();
    past.sort_unstable();
    Snapshot {
        adopters,
        observation,
        lambda,
        recently_exposed: recent,
        past_exposed: past,
        first_exposure,
    }
}

/// Snapshot at the moment the cascade reaches `m` adopters.
pub fn snapshot_by_size(c: &Cascade, g: &SocialGraph, m: usize, lambda: f64) -> Result<Snapshot> {
    if m == 0 {
        return Err(Error::InvalidInput("snapshot size must be at least 1".into()));
    }
    if c.final_size() < m {
        return Err(Error::NotEligible(format!(
            "cascade `{}` has {} adopters, snapshot needs {m}",
            c.root_message_id,
            c.final_size()
        )));
    }
    let adopters = c.adoptions[..m].to_vec();
    let time = adopters[m - 1].time;
    Ok(split(adopters, Observation::Size { m, time }, g, lambda))
}

/// Snapshot `t` minutes after the seed post. `t` may be infinite.
pub fn snapshot_by_time(c: &Cascade, g: &SocialGraph, t: f64, lambda: f64) -> Result<Snapshot> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidInput(format!("observation time must be non-negative, got {t}")));
    }
    let k = c.adoptions.partition_point(|a| a.time <= t);
    Ok(split(c.adoptions[..k].to_vec(), Observation::Time { t }, g, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adoption(node: NodeId, time: f64, source: Option<NodeId>) -> Adoption {
        Adoption { node, time, source }
    }

    /// Edges a→{b,c}, b→{d}; adopters a@0, b@35.
    fn worked_example() -> (SocialGraph, Cascade) {
        let g = SocialGraph::from_uid_edges(&[("a", "b"), ("a", "c"), ("b", "d")], &[]);
        let id = |u: &str| g.node(u).unwrap();
        let c = Cascade {
            root_message_id: "m".into(),
            adoptions: vec![adoption(id("a"), 0.0, None), adoption(id("b"), 35.0, Some(id("a")))],
        };
        (g, c)
    }

    #[test]
    fn worked_split_at_forty_minutes() {
        let (g, c) = worked_example();
        let s = snapshot_by_time(&c, &g, 40.0, 30.0).unwrap();
        let id = |u: &str| g.node(u).unwrap();
        assert_eq!(s.recently_exposed, vec![id("d")]);
        assert_eq!(s.past_exposed, vec![id("c")]);
        assert_eq!(s.t_expose(id("d")).unwrap(), 5.0);
        assert_eq!(s.t_expose(id("c")).unwrap(), 40.0);
        assert!(s.t_expose(id("a")).is_err());
    }

    #[test]
    fn size_one_snapshot() {
        let (g, c) = worked_example();
        let s = snapshot_by_size(&c, &g, 1, 30.0).unwrap();
        assert_eq!(s.adopters.len(), 1);
        assert_eq!(s.observed_at(), 0.0);
        assert!(s.past_exposed.is_empty());
        assert_eq!(s.recently_exposed, g.out_neighbors(c.seed_adopter()).to_vec());
    }

    #[test]
    fn size_larger_than_cascade_is_not_eligible() {
        let (g, c) = worked_example();
        assert!(matches!(snapshot_by_size(&c, &g, 5, 30.0), Err(Error::NotEligible(_))));
    }

    #[test]
    fn time_extremes() {
        let (g, c) = worked_example();
        assert_eq!(snapshot_by_time(&c, &g, 10.0, 30.0).unwrap().adopters.len(), 1);
        let all = snapshot_by_time(&c, &g, f64::INFINITY, 30.0).unwrap();
        assert_eq!(all.adopters.len(), 2);
        // infinite exposure age is always past
        assert!(all.recently_exposed.is_empty());
    }

    #[test]
    fn lambda_boundary_is_recent() {
        let (g, c) = worked_example();
        let s = snapshot_by_time(&c, &g, 30.0, 30.0).unwrap();
        assert_eq!(s.recently_exposed.len(), 2);
        assert!(s.past_exposed.is_empty());
    }

    #[test]
    fn earliest_exposer_decides() {
        // v exposed by adopters at 10 and 35
        let g = SocialGraph::from_uid_edges(&[("s", "x"), ("s", "y"), ("x", "v"), ("y", "v")], &[]);
        let id = |u: &str| g.node(u).unwrap();
        let c = Cascade {
            root_message_id: "m".into(),
            adoptions: vec![
                adoption(id("s"), 0.0, None),
                adoption(id("x"), 10.0, Some(id("s"))),
                adoption(id("y"), 35.0, Some(id("s"))),
            ],
        };
        let s = snapshot_by_time(&c, &g, 40.0, 30.0).unwrap();
        assert_eq!(t_expose(id("v"), &s).unwrap(), 30.0);
        let exactly = snapshot_by_time(&c, &g, 35.0, 30.0).unwrap();
        assert_eq!(exactly.t_expose(id("v")).unwrap(), 25.0);
    }

    #[test]
    fn adopters_outside_graph_expose_nobody() {
        let (g, mut c) = worked_example();
        c.adoptions.push(adoption(NodeId(99), 36.0, Some(c.seed_adopter())));
        let s = snapshot_by_time(&c, &g, 40.0, 30.0).unwrap();
        assert_eq!(s.adopters.len(), 3);
        assert_eq!(s.exposed().len(), 2);
    }
}
