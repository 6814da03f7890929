use log::warn;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// A synthetic minority sample with the two minority points it interpolates.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPoint {
    pub features: Vec<f64>,
    pub base: usize,
    pub neighbor: usize,
    /// Position along the segment from `base` to `neighbor`.
    pub u: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// SMOTE oversampling, keeping track of each synthetic point's parents.
///
/// Base points are drawn uniformly; the neighbour is drawn uniformly among
/// the base's `k` nearest minority points (Euclidean, ties broken by index).
pub fn smote_with_parents(minority: &[Vec<f64>], k: usize, n_synthetic: usize, seed: u64) -> Result<Vec<SyntheticPoint>> {
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    if minority.len() < 2 {
        return Err(Error::InvalidInput(format!("SMOTE needs at least 2 minority samples, got {}", minority.len())));
    }
    if k == 0 {
        return Err(Error::InvalidInput("SMOTE needs k >= 1".into()));
    }
    let k = if k >= minority.len() {
        warn!("SMOTE k = {k} clipped to {} for {} minority samples", minority.len() - 1, minority.len());
        minority.len() - 1
    } else {
        k
    };
    let neighbours: Vec<Vec<usize>> = minority
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut d: Vec<(f64, usize)> = minority.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, y)| (sq_dist(x, y), j)).collect();
            d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let mut rng = seed::rng(seed, &[]);
    Ok((0..n_synthetic)
        .map(|_| {
            let base = rng.random_range(0..minority.len());
            let neighbor = neighbours[base][rng.random_range(0..k)];
            let u: f64 = rng.random();
            let (a, b) = (&minority[base], &minority[neighbor]);
            let features = a.iter().zip(b).map(|(&x, &y)| (x + u * (y - x)).clamp(x.min(y), x.max(y))).collect();
            SyntheticPoint { features, base, neighbor, u }
        })
        .collect())
}

pub fn smote(minority: &[Vec<f64>], k: usize, n_synthetic: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(smote_with_parents(minority, k, n_synthetic, seed)?.into_iter().map(|p| p.features).collect())
}
