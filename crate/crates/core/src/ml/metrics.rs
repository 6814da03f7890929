use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with the viral class as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(predicted: &[bool], truth: &[bool]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::InvalidInput(format!("{} predictions for {} labels", predicted.len(), truth.len())));
        }
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn predicted_positive(&self) -> usize {
        self.tp + self.fp
    }

    /// Zero when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Viral-class scores. Cross-validated metrics are means over repeats, with
/// the spread across repeats in the `*_std` fields; `confusion` sums every
/// test prediction of every repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_std: f64,
    pub recall_std: f64,
    pub f1_std: f64,
    pub confusion: Confusion,
    pub repeats: usize,
    /// Mean final size of viral test samples predicted viral.
    pub avg_final_size_correct_viral: Option<f64>,
    /// Mean final size of viral test samples predicted non-viral.
    pub avg_final_size_incorrect_viral: Option<f64>,
}

impl Metrics {
    /// Aggregates per-repeat confusions; final sizes of viral test samples
    /// are split by whether they were predicted viral.
    pub(crate) fn aggregate(per_repeat: &[Confusion], correct_sizes: &[usize], incorrect_sizes: &[usize]) -> Metrics {
        let mean_std = |f: fn(&Confusion) -> f64| -> (f64, f64) {
            let v: Vec<f64> = per_repeat.iter().map(f).collect();
            let n = v.len().max(1) as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        let (precision, precision_std) = mean_std(Confusion::precision);
        let (recall, recall_std) = mean_std(Confusion::recall);
        let (f1, f1_std) = mean_std(Confusion::f1);
        let mut confusion = Confusion::default();
        per_repeat.iter().for_each(|c| confusion.add(c));
        let mean = |xs: &[usize]| (!xs.is_empty()).then(|| xs.iter().sum::<usize>() as f64 / xs.len() as f64);
        Metrics {
            precision,
            recall,
            f1,
            precision_std,
            recall_std,
            f1_std,
            confusion,
            repeats: per_repeat.len(),
            avg_final_size_correct_viral: mean(correct_sizes),
            avg_final_size_incorrect_viral: mean(incorrect_sizes),
        }
    }
}

/// Metrics of one set of predictions against the truth.
pub fn classification_metrics(predicted: &[bool], truth: &[bool], final_sizes: &[usize]) -> Result<Metrics> {
    let c = Confusion::from_labels(predicted, truth)?;
    if final_sizes.len() != truth.len() {
        return Err(Error::InvalidInput(format!("{} final sizes for {} labels", final_sizes.len(), truth.len())));
    }
    let (mut correct, mut incorrect) = (Vec::new(), Vec::new());
    for ((&p, &t), &s) in predicted.iter().zip(truth).zip(final_sizes) {
        if t {
            if p { correct.push(s) } else { incorrect.push(s) }
        }
    }
    Ok(Metrics::aggregate(&[c], &correct, &incorrect))
}
