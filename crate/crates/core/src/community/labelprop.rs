use rand::seq::{IndexedRandom, SliceRandom};

use super::partition::Partition;
use crate::graph::SocialGraph;
use crate::seed;

/// Label propagation on the weighted undirected projection.
#[derive(Debug, Clone)]
pub struct LabelPropagation {
    pub max_iters: usize,
}

impl Default for LabelPropagation {
    fn default() -> Self {
        Self { max_iters: 100 }
    }
}

/// Each sweep visits nodes in a fresh random order and sets every node's
/// label to a heaviest label among its neighbours, breaking ties uniformly at
/// random. Stops when every node already carries one of its heaviest
/// neighbour labels, or after `max_iters` sweeps. Isolated nodes keep their
/// own label.
pub fn label_propagation(g: &SocialGraph, seed: u64, max_iters: usize) -> Partition {
    let view = g.undirected();
    let n = view.node_count();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut rng = seed::rng(seed, &[seed::hash_str("labelprop")]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut weight = vec![0.0; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut best: Vec<u32> = Vec::new();

    let mut heaviest = |v: usize, labels: &[u32], best: &mut Vec<u32>| {
        for (&u, &w) in view.neighbors(v).iter().zip(view.weights(v)) {
            let l = labels[u as usize];
            if weight[l as usize] == 0.0 {
                touched.push(l);
            }
            weight[l as usize] += w;
        }
        let max = touched.iter().map(|&l| weight[l as usize]).fold(0.0, f64::max);
        best.clear();
        best.extend(touched.iter().copied().filter(|&l| weight[l as usize] == max));
        best.sort_unstable();
        for &l in touched.iter() {
            weight[l as usize] = 0.0;
        }
        touched.clear();
    };

    for _ in 0..max_iters {
        order.shuffle(&mut rng);
        for &v in &order {
            if view.degree(v) == 0 {
                continue;
            }
            heaviest(v, &labels, &mut best);
            labels[v] = *best.choose(&mut rng).expect("node has neighbours");
        }
        let stable = (0..n).all(|v| {
            if view.degree(v) == 0 {
                return true;
            }
            heaviest(v, &labels, &mut best);
            best.binary_search(&labels[v]).is_ok()
        });
        if stable {
            break;
        }
    }
    Partition::from_labels(&labels, "labelprop")
}
