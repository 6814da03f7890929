use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows every tree until its leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
    Leaf { p_non_viral: f64, p_viral: f64 },
}

/// Binary classification tree stored as an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_probability(&self, x: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left as usize } else { right as usize };
                }
                TreeNode::Leaf { p_viral, .. } => return p_viral,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.leaf_probability(x) > 0.5
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Split { left, right, .. } => 1 + walk(t, left as usize).max(walk(t, right as usize)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub n_features: usize,
    pub seed: u64,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn viral_votes(&self, x: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.predict(x)).count()
    }

    /// Viral when a strict majority of trees vote viral.
    pub fn predict(&self, x: &[f64]) -> bool {
        2 * self.viral_votes(x) > self.trees.len()
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<bool> {
        rows.iter().map(|x| self.predict(x)).collect()
    }

    pub fn save_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn load_json<R: Read>(r: R) -> Result<Self> {
        let m: ForestModel = serde_json::from_reader(r)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}

struct Builder<'a> {
    cols: &'a [Vec<f64>],
    y: &'a [bool],
    cfg: &'a ForestConfig,
    mtry: usize,
    buf: Vec<(f64, bool)>,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[u32]) -> TreeNode {
        let pos = idx.iter().filter(|&&i| self.y[i as usize]).count();
        let p_viral = pos as f64 / idx.len() as f64;
        TreeNode::Leaf {
            p_non_viral: 1.0 - p_viral,
            p_viral,
        }
    }

    /// Best Gini split over a random feature subset. Constant features do not
    /// count towards the subset, and the search goes on past it until some
    /// valid split turns up.
    fn best_split(&mut self, idx: &[u32], order: &mut [usize], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        order.shuffle(rng);
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i as usize]).count() as f64;
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        let mut tried = 0;
        for &f in order.iter() {
            if tried >= self.mtry && best.is_some() {
                break;
            }
            let col = &self.cols[f];
            self.buf.clear();
            self.buf.extend(idx.iter().map(|&i| (col[i as usize], self.y[i as usize])));
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if self.buf[0].0 == self.buf[n - 1].0 {
                continue;
            }
            tried += 1;
            let mut left_pos = 0.0;
            for j in 1..n {
                if self.buf[j - 1].1 {
                    left_pos += 1.0;
                }
                if j < min_leaf || n - j < min_leaf || self.buf[j - 1].0 == self.buf[j].0 {
                    continue;
                }
                let (nl, nr) = (j as f64, (n - j) as f64);
                let right_pos = total_pos - left_pos;
                // maximising this minimises the size-weighted child Gini impurity
                let score = (left_pos * left_pos + (nl - left_pos) * (nl - left_pos)) / nl
                    + (right_pos * right_pos + (nr - right_pos) * (nr - right_pos)) / nr;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let (a, b) = (self.buf[j - 1].0, self.buf[j].0);
                    let mid = 0.5 * (a + b);
                    let threshold = if mid >= a && mid < b { mid } else { a };
                    best = Some(BestSplit { score, feature: f, threshold });
                }
            }
        }
        best
    }

    fn grow(&mut self, mut idx: Vec<u32>, rng: &mut ChaCha8Rng) -> Tree {
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        let mut nodes = vec![self.leaf(&idx)];
        // (node id, start, end, depth)
        let mut stack = vec![(0usize, 0usize, idx.len(), 0usize)];
        while let Some((id, start, end, depth)) = stack.pop() {
            let range = &mut idx[start..end];
            let n = range.len();
            let pos = range.iter().filter(|&&i| self.y[i as usize]).count();
            if pos == 0 || pos == n || n < 2 * self.cfg.min_leaf.max(1) || self.cfg.max_depth.is_some_and(|d| depth >= d) {
                continue;
            }
            let Some(split) = self.best_split(range, &mut order, rng) else {
                continue;
            };
            let col = &self.cols[split.feature];
            let mut mid = 0;
            for k in 0..n {
                if col[range[k] as usize] <= split.threshold {
                    range.swap(mid, k);
                    mid += 1;
                }
            }
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(self.leaf(&range[..mid]));
            nodes.push(self.leaf(&range[mid..]));
            nodes[id] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left as u32,
                right: right as u32,
            };
            stack.push((right, start + mid, end, depth + 1));
            stack.push((left, start, start + mid, depth + 1));
        }
        Tree { nodes }
    }
}

/// Trains a random forest of CART trees on `x` with viral labels `y`.
pub fn train_forest(x: &[Vec<f64>], y: &[bool], cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows for {} labels", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if cfg.n_trees == 0 {
        return Err(Error::config("forest.n_trees", "must be at least 1"));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("training rows differ in length".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training feature".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::InvalidInput(format!("single-class training set ({pos} viral of {})", y.len())));
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|f| x.iter().map(|r| r[f]).collect()).collect();
    let mtry = cfg.features_per_split.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize).clamp(1, d.max(1));
    let n = x.len();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed, &[t as u64]);
            let idx: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            let mut b = Builder {
                cols: &cols,
                y,
                cfg,
                mtry,
                buf: Vec::with_capacity(n),
            };
            b.grow(idx, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        format_version: MODEL_FORMAT_VERSION,
        n_features: d,
        seed,
        config: cfg.clone(),
        trees,
    })
}
