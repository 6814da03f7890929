use serde::{Deserialize, Serialize};

use super::{NodeId, SocialGraph, UndirectedView};
use crate::error::{Error, Result};

/// Centrality profile of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalFeatures {
    pub k_shell: u32,
    pub out_degree: u32,
    pub in_degree: u32,
    pub pagerank: f64,
    pub eigenvector: f64,
}

impl NodalFeatures {
    pub const NAMES: [&'static str; 5] = ["seed_k_shell", "seed_out_degree", "seed_in_degree", "seed_pagerank", "seed_eigenvector"];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            f64::from(self.k_shell),
            f64::from(self.out_degree),
            f64::from(self.in_degree),
            self.pagerank,
            self.eigenvector,
        ]
    }
}

/// Core number of every node of the undirected simple projection
/// (Batagelj–Zaversnik bucket peeling).
pub fn core_numbers(view: &UndirectedView) -> Vec<u32> {
    let n = view.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| view.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        order[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;
    for i in 0..n {
        let v = order[i];
        for &u in view.neighbors(v) {
            let u = u as usize;
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree.into_iter().map(|d| d as u32).collect()
}

#[derive(Debug, Clone)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
}

/// PageRank by power iteration along edge direction. Dangling mass is
/// spread uniformly; iteration stops once the L1 change drops below `tol`.
pub fn pagerank(g: &SocialGraph, damping: f64, tol: f64, max_iter: usize) -> PageRank {
    let n = g.node_count();
    if n == 0 {
        return PageRank {
            scores: Vec::new(),
            iterations: 0,
            residual: 0.0,
        };
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter && residual >= tol {
        let dangling: f64 = g.nodes().filter(|&v| g.out_degree(v) == 0).map(|v| rank[v.index()]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for v in g.nodes() {
            let outs = g.out_neighbors(v);
            if outs.is_empty() {
                continue;
            }
            let share = damping * rank[v.index()] / outs.len() as f64;
            for w in outs {
                next[w.index()] += share;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        iterations += 1;
    }
    PageRank {
        scores: rank,
        iterations,
        residual,
    }
}

/// Eigenvector centrality on the unweighted undirected projection, computed
/// by power iteration on `A + I` (the shift keeps bipartite components from
/// oscillating) with L2 normalisation.
pub fn eigenvector_centrality(view: &UndirectedView, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = view.node_count();
    if n == 0 {
        return Vec::new();
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        for v in 0..n {
            next[v] = x[v] + view.neighbors(v).iter().map(|&u| x[u as usize]).sum::<f64>();
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        next.iter_mut().for_each(|a| *a /= norm);
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < tol * n as f64 {
            break;
        }
    }
    x
}

/// Nodal features for every graph node, computed once and shared.
#[derive(Debug, Clone)]
pub struct NodalFeatureTable {
    k_shell: Vec<u32>,
    out_degree: Vec<u32>,
    in_degree: Vec<u32>,
    pagerank: Vec<f64>,
    eigenvector: Vec<f64>,
}

impl NodalFeatureTable {
    pub const MAX_ITER: usize = 10_000;

    pub fn compute(g: &SocialGraph, damping: f64, tol: f64) -> Self {
        let view = g.undirected();
        Self {
            k_shell: core_numbers(&view),
            out_degree: g.nodes().map(|v| g.out_degree(v) as u32).collect(),
            in_degree: g.nodes().map(|v| g.in_degree(v) as u32).collect(),
            pagerank: pagerank(g, damping, tol, Self::MAX_ITER).scores,
            eigenvector: eigenvector_centrality(&view, tol, Self::MAX_ITER),
        }
    }

    /// Features of `v`; `None` for ids outside the graph.
    pub fn get(&self, v: NodeId) -> Option<NodalFeatures> {
        let i = v.index();
        (i < self.k_shell.len()).then(|| NodalFeatures {
            k_shell: self.k_shell[i],
            out_degree: self.out_degree[i],
            in_degree: self.in_degree[i],
            pagerank: self.pagerank[i],
            eigenvector: self.eigenvector[i],
        })
    }
}

pub fn nodal_features(g: &SocialGraph, v: NodeId, damping: f64, tol: f64) -> Result<NodalFeatures> {
    if !g.contains(v) {
        return Err(Error::UnknownNode(v.to_string()));
    }
    Ok(NodalFeatureTable::compute(g, damping, tol).get(v).expect("checked above"))
}
