use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{Observation, Snapshot};
use crate::community::{CommunityId, Partition};
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// How the members of a node set spread over communities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommunityProfile {
    pub counts: BTreeMap<CommunityId, usize>,
    pub size: usize,
}

impl CommunityProfile {
    pub fn distinct_communities(&self) -> usize {
        self.counts.len()
    }
}

/// Per-community membership counts of `set`. Fails if a member has no community.
pub fn communities_of(set: &[NodeId], p: &Partition) -> Result<CommunityProfile> {
    let mut counts = BTreeMap::new();
    for &v in set {
        let c = p
            .community_of(v)
            .ok_or_else(|| Error::InvalidPartition(format!("node {v} has no community")))?;
        *counts.entry(c).or_insert(0) += 1;
    }
    Ok(CommunityProfile { counts, size: set.len() })
}

/// `1 - Σ (n_c / |S|)^2` over the communities present in the profile; 0 for
/// an empty set.
pub fn gini_of_profile(profile: &CommunityProfile) -> f64 {
    if profile.size == 0 {
        return 0.0;
    }
    let n = profile.size as f64;
    1.0 - profile.counts.values().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

pub fn gini_impurity(set: &[NodeId], p: &Partition) -> Result<f64> {
    Ok(gini_of_profile(&communities_of(set, p)?))
}

pub fn overlap_of_profiles(a: &CommunityProfile, b: &CommunityProfile) -> usize {
    let (small, large) = if a.counts.len() <= b.counts.len() { (a, b) } else { (b, a) };
    small.counts.keys().filter(|c| large.counts.contains_key(c)).count()
}

/// Number of communities represented in both sets.
pub fn overlap(a: &[NodeId], b: &[NodeId], p: &Partition) -> Result<usize> {
    Ok(overlap_of_profiles(&communities_of(a, p)?, &communities_of(b, p)?))
}

/// Mean adoption time over the adopters of a size-based snapshot.
pub fn avg_time_to_adoption(s: &Snapshot) -> Result<f64> {
    match s.observation {
        Observation::Size { m, .. } => Ok(s.adopters.iter().map(|a| a.time).sum::<f64>() / m as f64),
        Observation::Time { .. } => Err(Error::InvalidInput("average time to adoption needs a size-based snapshot".into())),
    }
}

/// Every measurement taken on one snapshot.
///
/// Community measures of the adopter set only consider adopters that belong
/// to the partition; set sizes count all of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeasures {
    pub size_u: usize,
    pub size_f: usize,
    pub size_n: usize,
    pub n_comm_u: usize,
    pub n_comm_f: usize,
    pub n_comm_n: usize,
    pub gini_u: f64,
    pub gini_f: f64,
    pub gini_n: f64,
    pub overlap_u_f: usize,
    pub overlap_u_n: usize,
    pub overlap_f_n: usize,
    /// Present for size-based snapshots only.
    pub avg_time: Option<f64>,
}

pub fn measure_snapshot(s: &Snapshot, p: &Partition) -> Result<SnapshotMeasures> {
    let known: Vec<NodeId> = s.adopters.iter().map(|a| a.node).filter(|&v| p.community_of(v).is_some()).collect();
    let u = communities_of(&known, p)?;
    let f = communities_of(&s.recently_exposed, p)?;
    let n = communities_of(&s.past_exposed, p)?;
    Ok(SnapshotMeasures {
        size_u: s.adopters.len(),
        size_f: s.recently_exposed.len(),
        size_n: s.past_exposed.len(),
        n_comm_u: u.distinct_communities(),
        n_comm_f: f.distinct_communities(),
        n_comm_n: n.distinct_communities(),
        gini_u: gini_of_profile(&u),
        gini_f: gini_of_profile(&f),
        gini_n: gini_of_profile(&n),
        overlap_u_f: overlap_of_profiles(&u, &f),
        overlap_u_n: overlap_of_profiles(&u, &n),
        overlap_f_n: overlap_of_profiles(&f, &n),
        avg_time: avg_time_to_adoption(s).ok(),
    })
}
