//! Multi-level greedy modularity optimisation.
//!
//! Each pass runs local moving on the current level graph until no node
//! changes community, then collapses communities into super-nodes. Passes
//! stop when modularity improves by less than [`Louvain::MIN_GAIN`] or after
//! `max_passes`.

use rand::seq::SliceRandom;

use super::partition::{modularity, Partition};
use crate::graph::SocialGraph;
use crate::seed;

#[derive(Debug, Clone)]
pub struct Louvain {
    pub max_passes: usize,
}

impl Default for Louvain {
    fn default() -> Self {
        Self { max_passes: 32 }
    }
}

impl Louvain {
    pub const MIN_GAIN: f64 = 1e-7;
    /// Smallest scaled gain that counts as an improving move.
    const MOVE_EPS: f64 = 1e-12;
}

#[derive(Debug, Clone)]
pub struct LouvainOutcome {
    pub partition: Partition,
    /// Modularity of the singleton start followed by one entry per completed pass.
    pub pass_modularity: Vec<f64>,
}

struct LevelGraph {
    adj: Vec<Vec<(u32, f64)>>,
    self_loops: Vec<f64>,
}

impl LevelGraph {
    fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[v]
    }

    fn aggregate(&self, comm: &[u32], k: usize) -> LevelGraph {
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); k];
        let mut self_loops = vec![0.0; k];
        for (v, nbrs) in self.adj.iter().enumerate() {
            let cv = comm[v];
            self_loops[cv as usize] += self.self_loops[v];
            for &(u, w) in nbrs {
                let cu = comm[u as usize];
                if cu == cv {
                    // each internal pair is visited from both ends
                    self_loops[cv as usize] += w / 2.0;
                } else {
                    adj[cv as usize].push((cu, w));
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable_by_key(|&(u, _)| u);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(list.len());
            for &(u, w) in list.iter() {
                match merged.last_mut() {
                    Some((last, acc)) if *last == u => *acc += w,
                    _ => merged.push((u, w)),
                }
            }
            *list = merged;
        }
        LevelGraph { adj, self_loops }
    }
}

/// Local moving phase. Returns dense community labels and whether any node moved.
fn local_moving(level: &LevelGraph, two_m: f64, order: &[usize]) -> (Vec<u32>, bool) {
    let n = level.adj.len();
    let strength: Vec<f64> = (0..n).map(|v| level.strength(v)).collect();
    let mut comm: Vec<u32> = (0..n as u32).collect();
    let mut total = strength.clone();
    let mut link = vec![0.0; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut moved_any = false;

    loop {
        let mut moved = false;
        for &v in order {
            let kv = strength[v];
            let current = comm[v];
            for &(u, w) in &level.adj[v] {
                let c = comm[u as usize];
                if link[c as usize] == 0.0 {
                    touched.push(c);
                }
                link[c as usize] += w;
            }
            total[current as usize] -= kv;

            let gain = |c: u32, link: &[f64], total: &[f64]| link[c as usize] - total[c as usize] * kv / two_m;
            let mut best = current;
            let mut best_gain = gain(current, &link, &total);
            for &c in &touched {
                let g = gain(c, &link, &total);
                if g > best_gain + Louvain::MOVE_EPS {
                    best = c;
                    best_gain = g;
                }
            }
            total[best as usize] += kv;
            if best != current {
                comm[v] = best;
                moved = true;
                moved_any = true;
            }
            for &c in &touched {
                link[c as usize] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }

    let mut dense = vec![u32::MAX; n];
    let mut next = 0u32;
    for c in comm.iter_mut() {
        if dense[*c as usize] == u32::MAX {
            dense[*c as usize] = next;
            next += 1;
        }
        *c = dense[*c as usize];
    }
    (comm, moved_any)
}

pub fn louvain_with_trace(g: &SocialGraph, seed: u64, max_passes: usize) -> LouvainOutcome {
    let n = g.node_count();
    let view = g.undirected();
    let two_m: f64 = view.weights.iter().sum();
    let mut membership: Vec<u32> = (0..n as u32).collect();
    let singleton = Partition::from_labels(&membership, "louvain");
    let mut pass_modularity = vec![modularity(g, &singleton)];
    if two_m == 0.0 {
        return LouvainOutcome {
            partition: singleton,
            pass_modularity,
        };
    }

    let mut level = LevelGraph {
        adj: (0..n)
            .map(|v| {
                view.neighbors(v)
                    .iter()
                    .copied()
                    .zip(view.weights(v).iter().copied())
                    .collect()
            })
            .collect(),
        self_loops: vec![0.0; n],
    };
    let mut rng = seed::rng(seed, &[seed::hash_str("louvain")]);

    for _ in 0..max_passes {
        let mut order: Vec<usize> = (0..level.adj.len()).collect();
        order.shuffle(&mut rng);
        let (comm, moved) = local_moving(&level, two_m, &order);
        if !moved {
            break;
        }
        for m in membership.iter_mut() {
            *m = comm[*m as usize];
        }
        let k = comm.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let q = modularity(g, &Partition::from_labels(&membership, "louvain"));
        let prev = *pass_modularity.last().unwrap();
        pass_modularity.push(q);
        if q - prev < Louvain::MIN_GAIN {
            break;
        }
        level = level.aggregate(&comm, k);
    }

    LouvainOutcome {
        partition: Partition::from_labels(&membership, "louvain"),
        pass_modularity,
    }
}

pub fn louvain(g: &SocialGraph, seed: u64, max_passes: usize) -> Partition {
    louvain_with_trace(g, seed, max_passes).partition
}
