use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommunityId(pub u32);

/// Assignment of every graph node to exactly one community. Community ids
/// are dense in `0..community_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<CommunityId>,
    community_count: usize,
    method_tag: String,
}

impl Partition {
    /// Relabels arbitrary per-node labels densely, in order of first appearance.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L], method_tag: impl Into<String>) -> Self {
        let mut dense: HashMap<L, u32> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = dense.len() as u32;
                CommunityId(*dense.entry(*l).or_insert(next))
            })
            .collect();
        Self {
            assignment,
            community_count: dense.len(),
            method_tag: method_tag.into(),
        }
    }

    pub fn singletons(n: usize, method_tag: impl Into<String>) -> Self {
        let labels: Vec<usize> = (0..n).collect();
        Self::from_labels(&labels, method_tag)
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }

    pub fn with_method_tag(mut self, tag: impl Into<String>) -> Self {
        self.method_tag = tag.into();
        self
    }

    /// Community of `v`, or `None` when `v` is not a partitioned node.
    pub fn community_of(&self, v: NodeId) -> Option<CommunityId> {
        self.assignment.get(v.index()).copied()
    }

    pub fn assignment(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for c in &self.assignment {
            sizes[c.0 as usize] += 1;
        }
        sizes
    }

    /// Checks that the partition covers exactly the nodes of `g` with dense ids.
    pub fn validate(&self, g: &SocialGraph) -> Result<()> {
        if self.assignment.len() != g.node_count() {
            return Err(Error::InvalidPartition(format!(
                "covers {} nodes but the graph has {}",
                self.assignment.len(),
                g.node_count()
            )));
        }
        let mut seen = vec![false; self.community_count];
        for c in &self.assignment {
            let slot = seen
                .get_mut(c.0 as usize)
                .ok_or_else(|| Error::InvalidPartition(format!("community id {} out of range", c.0)))?;
            *slot = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("community id {empty} is unused")));
        }
        Ok(())
    }

    /// Writes `uid <TAB> community_id`, one node per line in id order.
    pub fn write<W: Write>(&self, g: &SocialGraph, mut w: W) -> std::io::Result<()> {
        for v in g.nodes() {
            writeln!(w, "{}\t{}", g.uid(v), self.assignment[v.index()].0)?;
        }
        Ok(())
    }
}

/// Reads a `uid <TAB> community_id` file and validates it against `g`:
/// every node must appear exactly once and every uid must be a graph node.
pub fn read_partition<R: BufRead>(reader: R, label: &str, g: &SocialGraph) -> Result<Partition> {
    let mut raw: Vec<Option<String>> = vec![None; g.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(label, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (uid, cid) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: label.to_string(),
            line: i + 1,
            message: "expected `uid <TAB> community_id`".to_string(),
        })?;
        let v = g
            .node(uid)
            .ok_or_else(|| Error::InvalidPartition(format!("line {}: unknown node `{uid}`", i + 1)))?;
        let slot = &mut raw[v.index()];
        if slot.is_some() {
            return Err(Error::InvalidPartition(format!("line {}: duplicate node `{uid}`", i + 1)));
        }
        *slot = Some(cid.trim().to_string());
    }
    if let Some(missing) = raw.iter().position(Option::is_none) {
        return Err(Error::InvalidPartition(format!(
            "node `{}` missing from partition file",
            g.uid(NodeId(missing as u32))
        )));
    }
    let labels: Vec<&str> = raw.iter().map(|s| s.as_deref().unwrap()).collect();
    Ok(Partition::from_labels(&labels, "file"))
}

pub fn load_partition(path: &Path, g: &SocialGraph) -> Result<Partition> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_partition(std::io::BufReader::new(file), &path.display().to_string(), g)
}

/// Newman modularity (resolution 1) of `p` on the weighted undirected
/// projection of `g`. Zero for graphs without edges.
pub fn modularity(g: &SocialGraph, p: &Partition) -> f64 {
    let view = g.undirected();
    let two_m: f64 = view.weights.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let k = p.community_count();
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for v in 0..view.node_count() {
        let cv = p.assignment[v].0 as usize;
        for (&u, &w) in view.neighbors(v).iter().zip(view.weights(v)) {
            total[cv] += w;
            if p.assignment[u as usize].0 as usize == cv {
                internal[cv] += w;
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(i, t)| i / two_m - (t / two_m).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique_edges(prefix: &str, n: usize) -> Vec<(String, String)> {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((format!("{prefix}{i}"), format!("{prefix}{j}")));
            }
        }
        e
    }

    #[test]
    fn singleton_partition_of_edgeless_graph() {
        let g = SocialGraph::from_uid_edges::<&str>(&[], &["a", "b"]);
        assert_eq!(modularity(&g, &Partition::singletons(2, "t")), 0.0);
    }

    #[test]
    fn two_disconnected_cliques() {
        let mut e = clique_edges("a", 4);
        e.extend(clique_edges("b", 4));
        let g = SocialGraph::from_uid_edges(&e, &[]);
        let labels: Vec<bool> = g.nodes().map(|v| g.uid(v).starts_with('a')).collect();
        let q = modularity(&g, &Partition::from_labels(&labels, "t"));
        assert!((q - 0.5).abs() < 1e-15);
        let all = Partition::from_labels(&vec![0; g.node_count()], "t");
        assert!(modularity(&g, &all).abs() < 1e-15);
    }

    #[test]
    fn from_labels_is_dense() {
        let p = Partition::from_labels(&[7, 3, 7, 9], "t");
        assert_eq!(p.community_count(), 3);
        assert_eq!(p.assignment(), &[CommunityId(0), CommunityId(1), CommunityId(0), CommunityId(2)]);
    }

    #[test]
    fn file_round_trip_and_errors() {
        let g = SocialGraph::from_uid_edges(&[("a", "b"), ("b", "c")], &[]);
        let p = Partition::from_labels(&[0, 0, 1], "file");
        let mut buf = Vec::new();
        p.write(&g, &mut buf).unwrap();
        assert_eq!(read_partition(&buf[..], "mem", &g).unwrap(), p);

        let missing = read_partition("a\t1\nb\t1\n".as_bytes(), "mem", &g).unwrap_err();
        assert!(missing.to_string().contains("`c` missing"), "{missing}");
        let dup = read_partition("a\t1\nb\t1\nc\t2\na\t2\n".as_bytes(), "mem", &g).unwrap_err();
        assert!(dup.to_string().contains("duplicate node `a`"), "{dup}");
        let unknown = read_partition("a\t1\nb\t1\nc\t2\nq\t2\n".as_bytes(), "mem", &g).unwrap_err();
        assert!(unknown.to_string().contains("unknown node `q`"), "{unknown}");
    }
}
