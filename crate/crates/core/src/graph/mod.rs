//! The directed social graph derived from a window of repost history.
//!
//! An edge `(v, w)` exists when `w` reposted from `v` at least once inside the
//! build window. Edges are deduplicated and unweighted, self-reposts are
//! dropped, and the graph is immutable once built.

mod log;
mod nodal;
mod stats;

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::log::{parse_line, read_log, write_log, LineError, LogReadout, RepostEvent, TimeWindow, NO_SOURCE};
pub use self::nodal::{core_numbers, eigenvector_centrality, nodal_features, pagerank, NodalFeatureTable, NodalFeatures, PageRank};
pub use self::stats::{network_stats, NetworkStats};

/// Dense node identifier. Ids `0..graph.node_count()` are graph nodes; an
/// [`Interner`] may extend the space with users that only appear in cascades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bidirectional uid ↔ [`NodeId`] dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    uids: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.uids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uids.is_empty()
    }

    pub fn intern(&mut self, uid: &str) -> NodeId {
        if let Some(&id) = self.ids.get(uid) {
            return id;
        }
        let id = NodeId(u32::try_from(self.uids.len()).expect("more than 2^32 distinct users"));
        self.uids.push(uid.to_string());
        self.ids.insert(uid.to_string(), id);
        id
    }

    pub fn get(&self, uid: &str) -> Option<NodeId> {
        self.ids.get(uid).copied()
    }

    pub fn uid(&self, id: NodeId) -> &str {
        &self.uids[id.index()]
    }

    pub fn uids(&self) -> &[String] {
        &self.uids
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    names: Interner,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    build_window: Option<TimeWindow>,
}

/// Undirected, weighted projection of a [`SocialGraph`]: one entry per
/// unordered neighbour pair, weight 1 for a single directed edge and 2 when
/// the edge is reciprocal.
#[derive(Debug, Clone)]
pub struct UndirectedView {
    pub offsets: Vec<usize>,
    pub neighbors: Vec<u32>,
    pub weights: Vec<f64>,
}

impl UndirectedView {
    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn strength(&self, v: usize) -> f64 {
        self.weights(v).iter().sum()
    }

    /// Sum of all undirected edge weights (each unordered pair once).
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() / 2.0
    }
}

fn csr(n: usize, pairs: &[(u32, u32)]) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; n + 1];
    for &(a, _) in pairs {
        offsets[a as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![NodeId(0); pairs.len()];
    for &(a, b) in pairs {
        targets[cursor[a as usize]] = NodeId(b);
        cursor[a as usize] += 1;
    }
    (offsets, targets)
}

impl SocialGraph {
    /// Builds a graph over an explicit node dictionary and a list of
    /// directed `(source, reposter)` edges. Duplicates and self-loops are removed.
    pub fn from_edges(names: Interner, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let n = names.len();
        let mut pairs: Vec<(u32, u32)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| {
                assert!(a.index() < n && b.index() < n, "edge endpoint outside dictionary");
                (a.0, b.0)
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let (out_offsets, out_targets) = csr(n, &pairs);
        let mut rev: Vec<(u32, u32)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        rev.sort_unstable();
        let (in_offsets, in_sources) = csr(n, &rev);
        Self {
            names,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            build_window: None,
        }
    }

    /// Convenience constructor from uid pairs; the node set is the sorted set
    /// of endpoints plus any extra isolated uids.
    pub fn from_uid_edges<S: AsRef<str>>(edges: &[(S, S)], isolated: &[S]) -> Self {
        let mut uids: Vec<&str> = edges
            .iter()
            .flat_map(|(a, b)| [a.as_ref(), b.as_ref()])
            .chain(isolated.iter().map(|s| s.as_ref()))
            .collect();
        uids.sort_unstable();
        uids.dedup();
        let mut names = Interner::new();
        for u in &uids {
            names.intern(u);
        }
        let pairs: Vec<(NodeId, NodeId)> = edges
            .iter()
            .map(|(a, b)| (names.get(a.as_ref()).unwrap(), names.get(b.as_ref()).unwrap()))
            .collect();
        Self::from_edges(names, pairs)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn names(&self) -> &Interner {
        &self.names
    }

    pub fn build_window(&self) -> Option<TimeWindow> {
        self.build_window
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn node(&self, uid: &str) -> Option<NodeId> {
        self.names.get(uid)
    }

    pub fn uid(&self, v: NodeId) -> &str {
        self.names.uid(v)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// Out-neighbours (users who reposted from `v`), sorted. Empty for ids
    /// outside the graph.
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        if !self.contains(v) {
            return &[];
        }
        &self.out_targets[self.out_offsets[v.index()]..self.out_offsets[v.index() + 1]]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        if !self.contains(v) {
            return &[];
        }
        &self.in_sources[self.in_offsets[v.index()]..self.in_offsets[v.index() + 1]]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_neighbors(v).len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.out_neighbors(from).binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |v| self.out_neighbors(v).iter().map(move |&w| (v, w)))
    }

    pub fn undirected(&self) -> UndirectedView {
        let n = self.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        for v in self.nodes() {
            let (outs, ins) = (self.out_neighbors(v), self.in_neighbors(v));
            let (mut i, mut j) = (0, 0);
            while i < outs.len() || j < ins.len() {
                let (node, w) = match (outs.get(i), ins.get(j)) {
                    (Some(a), Some(b)) if a == b => {
                        i += 1;
                        j += 1;
                        (*a, 2.0)
                    }
                    (Some(a), Some(b)) if a < b => {
                        i += 1;
                        (*a, 1.0)
                    }
                    (Some(a), None) => {
                        i += 1;
                        (*a, 1.0)
                    }
                    (_, Some(b)) => {
                        j += 1;
                        (*b, 1.0)
                    }
                    (None, None) => unreachable!(),
                };
                neighbors.push(node.0);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        UndirectedView {
            offsets,
            neighbors,
            weights,
        }
    }

    /// Writes the edge list, `source_uid <TAB> reposter_uid` per line.
    pub fn write_edges<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (a, b) in self.edges() {
            writeln!(w, "{}\t{}", self.uid(a), self.uid(b))?;
        }
        Ok(())
    }

    /// Writes the node dictionary, one uid per line in id order.
    pub fn write_nodes<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for uid in self.names.uids() {
            writeln!(w, "{uid}")?;
        }
        Ok(())
    }

    /// Restores a graph from its node dictionary and edge list.
    pub fn read<N: BufRead, E: BufRead>(nodes: N, edges: E, label: &str) -> Result<Self> {
        let mut names = Interner::new();
        for (i, line) in nodes.lines().enumerate() {
            let line = line.map_err(|e| Error::io(label, e))?;
            let uid = line.trim_end_matches('\r');
            if uid.is_empty() {
                continue;
            }
            if names.get(uid).is_some() {
                return Err(Error::Parse {
                    path: format!("{label} (nodes)"),
                    line: i + 1,
                    message: format!("duplicate uid `{uid}`"),
                });
            }
            names.intern(uid);
        }
        let mut pairs = Vec::new();
        for (i, line) in edges.lines().enumerate() {
            let line = line.map_err(|e| Error::io(label, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: format!("{label} (edges)"),
                line: i + 1,
                message,
            };
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `source <TAB> reposter`".into()))?;
            let a = names.get(a).ok_or_else(|| parse_err(format!("unknown uid `{a}`")))?;
            let b = names.get(b).ok_or_else(|| parse_err(format!("unknown uid `{b}`")))?;
            pairs.push((a, b));
        }
        Ok(Self::from_edges(names, pairs))
    }
}

/// Builds the social graph from the events whose timestamp lies in `window`.
///
/// Nodes are every user appearing in an in-window event (authors of original
/// posts included); ids are assigned in sorted uid order so the result does not
/// depend on event order.
pub fn build_graph<'a>(events: impl IntoIterator<Item = &'a RepostEvent>, window: TimeWindow) -> SocialGraph {
    let in_window: Vec<&RepostEvent> = events.into_iter().filter(|e| window.contains(e.timestamp)).collect();
    let mut uids: Vec<&str> = in_window
        .iter()
        .flat_map(|e| std::iter::once(e.reposter.as_str()).chain(e.source.as_deref()))
        .collect();
    uids.sort_unstable();
    uids.dedup();
    let mut names = Interner::new();
    for u in uids {
        names.intern(u);
    }
    let edges: Vec<(NodeId, NodeId)> = in_window
        .iter()
        .filter_map(|e| {
            let src = e.source.as_deref()?;
            Some((names.get(src).unwrap(), names.get(&e.reposter).unwrap()))
        })
        .collect();
    let mut g = SocialGraph::from_edges(names, edges);
    g.build_window = Some(window);
    g
}
