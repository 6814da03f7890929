//! Planted-community networks and simulated cascades for testing without a
//! real corpus.
//!
//! The network is a directed stochastic block model. Cascades spread along
//! out-edges in continuous time: every new exposure gives the exposed user
//! one chance to adopt, with a probability that grows with the number of
//! distinct communities among the user's adopted in-neighbours.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{CommunityId, Partition};
use crate::error::{Error, Result};
use crate::graph::{Interner, NodeId, RepostEvent, SocialGraph, TimeWindow};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CommunitySizes {
    Equal,
    /// Sizes proportional to `rank^-exponent`.
    Zipf { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub n_communities: usize,
    pub community_sizes: CommunitySizes,
    pub p_intra: f64,
    pub p_inter: f64,
    pub n_cascades: usize,
    pub p_base: f64,
    pub beta: f64,
    /// Mean of the exponential adoption delay.
    pub mean_delay_minutes: f64,
    /// Cap on adopters per cascade; `0` means no cap.
    pub max_steps: usize,
    /// Adoptions later than this many minutes after the seed are not simulated.
    pub horizon_minutes: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_nodes: 20_000,
            n_communities: 200,
            community_sizes: CommunitySizes::Equal,
            p_intra: 0.08,
            p_inter: 0.000_005,
            n_cascades: 10_000,
            p_base: 0.2,
            beta: 4.0,
            mean_delay_minutes: 20.0,
            max_steps: 5_000,
            horizon_minutes: Some(900.0),
            seed: 7,
        }
    }
}

/// Timestamp of the first history post.
pub const HISTORY_START: i64 = 1_300_000_000;
/// Cascades start at this timestamp; history reposts all precede it.
pub const CASCADE_START: i64 = 1_350_000_000;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_intra) || !(0.0..=1.0).contains(&self.p_inter) || self.p_inter > self.p_intra {
            return Err(Error::config("p_intra/p_inter", "need 0 <= p_inter <= p_intra <= 1"));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::config("beta", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.p_base) {
            return Err(Error::config("p_base", "must lie in [0, 1]"));
        }
        if !(self.mean_delay_minutes > 0.0 && self.mean_delay_minutes.is_finite()) {
            return Err(Error::config("mean_delay_minutes", "must be positive"));
        }
        if self.horizon_minutes.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::config("horizon_minutes", "must be positive"));
        }
        if self.n_nodes > 0 && (self.n_communities == 0 || self.n_communities > self.n_nodes) {
            return Err(Error::config(
                "n_communities",
                format!("{} communities cannot be laid out over {} nodes", self.n_communities, self.n_nodes),
            ));
        }
        if self.n_nodes > u32::MAX as usize {
            return Err(Error::config("n_nodes", "too many nodes"));
        }
        if let CommunitySizes::Zipf { exponent } = self.community_sizes {
            if !(exponent >= 0.0 && exponent.is_finite()) {
                return Err(Error::config("community_sizes.exponent", "must be a non-negative number"));
            }
        }
        Ok(())
    }

    /// Graph window covering the history reposts.
    pub fn graph_window(&self) -> TimeWindow {
        TimeWindow {
            start: HISTORY_START,
            end: CASCADE_START - 1,
        }
    }

    pub fn cascade_window(&self) -> TimeWindow {
        TimeWindow {
            start: CASCADE_START,
            end: i64::MAX,
        }
    }
}

fn community_sizes(cfg: &SynthConfig) -> Vec<usize> {
    let (n, k) = (cfg.n_nodes, cfg.n_communities);
    if n == 0 {
        return Vec::new();
    }
    match cfg.community_sizes {
        CommunitySizes::Equal => (0..k).map(|i| n / k + usize::from(i < n % k)).collect(),
        CommunitySizes::Zipf { exponent } => {
            // one node each, the rest shared in proportion to rank^-s
            let w: Vec<f64> = (1..=k).map(|r| (r as f64).powf(-exponent)).collect();
            let total: f64 = w.iter().sum();
            let spare = n - k;
            let mut sizes: Vec<usize> = w.iter().map(|x| 1 + (x / total * spare as f64).floor() as usize).collect();
            let mut left = n - sizes.iter().sum::<usize>();
            let mut i = 0;
            while left > 0 {
                sizes[i % k] += 1;
                left -= 1;
                i += 1;
            }
            sizes
        }
    }
}

/// Zero-padded so that lexicographic and numeric order agree.
fn uid(i: usize, width: usize) -> String {
    format!("u{i:0width$}")
}

fn uid_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

/// Pair indices in `0..total` hit by independent Bernoulli(p) draws.
fn bernoulli_indices(total: u64, p: f64, rng: &mut ChaCha8Rng, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - k) as f64 {
            return;
        }
        k += skip as u64;
        emit(k);
        k += 1;
        if k >= total {
            return;
        }
    }
}

/// Directed stochastic block model with its planted partition.
pub fn generate_network(cfg: &SynthConfig) -> Result<(SocialGraph, Partition)> {
    cfg.validate()?;
    let sizes = community_sizes(cfg);
    let mut offsets = vec![0usize];
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mut rng = seed::rng(cfg.seed, &[0x6e65_7477]);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for a in 0..sizes.len() {
        for b in 0..sizes.len() {
            let (sa, sb) = (sizes[a] as u64, sizes[b] as u64);
            let (oa, ob) = (offsets[a] as u64, offsets[b] as u64);
            if a == b {
                // skip the diagonal: index j of row i maps past i
                bernoulli_indices(sa * sa.saturating_sub(1), cfg.p_intra, &mut rng, |k| {
                    let (i, j) = (k / (sa - 1), k % (sa - 1));
                    let j = if j >= i { j + 1 } else { j };
                    edges.push((NodeId((oa + i) as u32), NodeId((oa + j) as u32)));
                });
            } else {
                bernoulli_indices(sa * sb, cfg.p_inter, &mut rng, |k| {
                    edges.push((NodeId((oa + k / sb) as u32), NodeId((ob + k % sb) as u32)));
                });
            }
        }
    }
    let width = uid_width(cfg.n_nodes);
    let mut names = Interner::new();
    for i in 0..cfg.n_nodes {
        names.intern(&uid(i, width));
    }
    let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
    let partition = Partition::from_labels(&labels, "planted");
    Ok((SocialGraph::from_edges(names, edges), partition))
}

/// Simulated cascades in adoption order: `(node, seconds after the seed, source)`.
pub type SimulatedCascade = Vec<(NodeId, i64, Option<NodeId>)>;

fn simulate_one(g: &SocialGraph, community: &[CommunityId], cfg: &SynthConfig, delay: &Exp<f64>, index: usize) -> SimulatedCascade {
    let mut rng = seed::rng(cfg.seed, &[0x6361_7363, index as u64]);
    let n = g.node_count();
    let seed_node = NodeId(rng.random_range(0..n) as u32);
    let cap = if cfg.max_steps == 0 { usize::MAX } else { cfg.max_steps };
    let horizon = cfg.horizon_minutes.map_or(i64::MAX, |h| (h * 60.0).min(i64::MAX as f64) as i64);
    let mut adopted: HashMap<NodeId, ()> = HashMap::new();
    let mut exposers: HashMap<NodeId, Vec<CommunityId>> = HashMap::new();
    let mut queue = BinaryHeap::new();
    let mut out = Vec::new();
    let mut seq: u64 = 0;
    queue.push(Reverse((0i64, seq, seed_node, None::<NodeId>)));
    while let Some(Reverse((t, _, v, src))) = queue.pop() {
        if adopted.insert(v, ()).is_some() {
            continue;
        }
        out.push((v, t, src));
        if out.len() >= cap {
            break;
        }
        let cv = community[v.index()];
        for &w in g.out_neighbors(v) {
            if adopted.contains_key(&w) {
                continue;
            }
            let seen = exposers.entry(w).or_default();
            if !seen.contains(&cv) {
                seen.push(cv);
            }
            let d = seen.len() as f64;
            let p = (cfg.p_base * (1.0 + cfg.beta * (d - 1.0))).min(1.0);
            if rng.random::<f64>() < p {
                let secs = (delay.sample(&mut rng) * 60.0).ceil().max(1.0) as i64;
                if t.saturating_add(secs) <= horizon {
                    seq += 1;
                    queue.push(Reverse((t + secs, seq, w, Some(v))));
                }
            }
        }
    }
    out
}

/// Runs `cfg.n_cascades` independent cascades; cascade `i` uses its own
/// seeded stream, so the output does not depend on scheduling.
pub fn simulate_cascades(g: &SocialGraph, truth: &Partition, cfg: &SynthConfig) -> Result<Vec<SimulatedCascade>> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Ok(Vec::new());
    }
    truth.validate(g)?;
    let delay = Exp::new(1.0 / cfg.mean_delay_minutes).map_err(|e| Error::config("mean_delay_minutes", e.to_string()))?;
    let community = truth.assignment();
    Ok((0..cfg.n_cascades)
        .into_par_iter()
        .map(|i| simulate_one(g, community, cfg, &delay, i))
        .collect())
}

/// Repost log holding the history that defines `g` followed by the cascades.
///
/// History: every node posts once, and each edge `u -> v` becomes a repost by
/// `v` of `u`'s post. Cascade `c` is rooted at message `m{c}`.
pub fn to_repost_log(g: &SocialGraph, cascades: &[SimulatedCascade]) -> Vec<RepostEvent> {
    let width = uid_width(g.node_count());
    let mut events = Vec::with_capacity(g.node_count() + g.edge_count());
    for v in g.nodes() {
        let msg = format!("h{:0width$}", v.0);
        events.push(RepostEvent::original(&msg, g.uid(v), HISTORY_START + i64::from(v.0)));
    }
    for (k, (u, v)) in g.edges().enumerate() {
        let root = format!("h{:0width$}", u.0);
        events.push(RepostEvent::repost(
            &format!("{root}_{k}"),
            &root,
            g.uid(v),
            g.uid(u),
            HISTORY_START + g.node_count() as i64 + k as i64,
        ));
    }
    let cwidth = cascades.len().saturating_sub(1).to_string().len();
    for (c, cascade) in cascades.iter().enumerate() {
        let root = format!("m{c:0cwidth$}");
        let t0 = CASCADE_START + 60 * c as i64;
        for (k, &(v, t, src)) in cascade.iter().enumerate() {
            events.push(match src {
                None => RepostEvent::original(&root, g.uid(v), t0 + t),
                Some(s) => RepostEvent::repost(&format!("{root}_{k}"), &root, g.uid(v), g.uid(s), t0 + t),
            });
        }
    }
    events
}
