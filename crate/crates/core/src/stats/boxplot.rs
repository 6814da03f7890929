use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-number summary plus mean, with Tukey whiskers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub n: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Smallest observation not below `q1 - 1.5·IQR`, or `q1` if that is lower.
    pub lower_whisker: f64,
    /// Largest observation not above `q3 + 1.5·IQR`, or `q3` if that is higher.
    pub upper_whisker: f64,
}

/// Linear-interpolation quantile (type 7) of an already sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_summary(xs: &[f64]) -> Result<BoxSummary> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("box summary of an empty sample".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("box summary: non-finite value".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile(&v, 0.25);
    let median = quantile(&v, 0.5);
    let q3 = quantile(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    // an interpolated quartile can sit beyond every in-fence point; the whisker then stops at the box
    let lower_whisker = v.iter().copied().find(|&x| x >= lo_fence).map_or(q1, |x| x.min(q1));
    let upper_whisker = v.iter().rev().copied().find(|&x| x <= hi_fence).map_or(q3, |x| x.max(q3));
    Ok(BoxSummary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        q1,
        median,
        q3,
        lower_whisker,
        upper_whisker,
    })
}
