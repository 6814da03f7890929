use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestConfig, ForestModel};
use super::metrics::{Confusion, Metrics};
use super::smote::smote;
use crate::error::{Error, Result};
use crate::features::LabeledSample;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Virality threshold used to label training folds.
    pub th_train: usize,
    /// Virality threshold used to label test folds and to stratify.
    pub th_test: usize,
    pub folds: usize,
    pub repeats: usize,
    pub smote_k: usize,
    /// Viral training samples are topped up to this fraction of the non-viral count.
    pub smote_target_ratio: f64,
    pub forest: ForestConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            th_train: 500,
            th_test: 500,
            folds: 10,
            repeats: 10,
            smote_k: 5,
            smote_target_ratio: 0.5,
            forest: ForestConfig::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.th_train == 0 || self.th_test == 0 {
            return Err(Error::config("th_train/th_test", "thresholds must be positive"));
        }
        if self.folds < 2 {
            return Err(Error::config("folds", "at least 2 folds are needed"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats", "at least one repeat is needed"));
        }
        if !(self.smote_target_ratio >= 0.0 && self.smote_target_ratio.is_finite()) {
            return Err(Error::config("smote_target_ratio", "must be a non-negative number"));
        }
        Ok(())
    }
}

/// Fold index per sample. Positives and then negatives are dealt round-robin
/// after a seeded shuffle, so fold positive counts differ by at most one.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let viral = labels.iter().filter(|&&l| l).count();
    if viral < folds {
        return Err(Error::TooFewViral {
            viral,
            total: labels.len(),
            required: folds,
        });
    }
    let mut rng = seed::rng(seed, &[]);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (k, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = k % folds;
    }
    Ok(fold)
}

/// Oversamples the viral rows with SMOTE and fits a forest.
pub fn fit_with_smote(x: &[Vec<f64>], y: &[bool], cfg: &ExperimentConfig, seed: u64) -> Result<ForestModel> {
    let minority: Vec<Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l).map(|(r, _)| r.clone()).collect();
    let majority = y.len() - minority.len();
    let target = (cfg.smote_target_ratio * majority as f64).ceil() as usize;
    let n_synthetic = target.saturating_sub(minority.len());
    if minority.is_empty() || majority == 0 {
        return Err(Error::InvalidInput(format!("single-class training set ({} viral of {})", minority.len(), y.len())));
    }
    let synthetic = smote(&minority, cfg.smote_k, n_synthetic, seed::derive(seed, &[1]))?;
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    ys.extend(std::iter::repeat_n(true, synthetic.len()));
    xs.extend(synthetic);
    train_forest(&xs, &ys, &cfg.forest, seed::derive(seed, &[2]))
}

/// Predictions of one (repeat, fold) cell for the samples of the test fold.
fn run_cell(samples: &[LabeledSample], fold: &[usize], f: usize, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<(usize, bool)>> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (s, &k) in samples.iter().zip(fold) {
        if k != f {
            x.push(s.features.clone());
            y.push(s.is_viral(cfg.th_train));
        }
    }
    let model = fit_with_smote(&x, &y, cfg, seed)?;
    Ok(samples
        .iter()
        .enumerate()
        .filter(|&(i, _)| fold[i] == f)
        .map(|(i, s)| (i, model.predict(&s.features)))
        .collect())
}

/// Repeated stratified k-fold cross-validation. SMOTE touches training
/// folds only; every (repeat, fold) cell has its own seeded stream.
pub fn cross_validate(samples: &[LabeledSample], cfg: &ExperimentConfig) -> Result<Metrics> {
    cfg.validate()?;
    let truth: Vec<bool> = samples.iter().map(|s| s.is_viral(cfg.th_test)).collect();
    let folds: Vec<Vec<usize>> = (0..cfg.repeats)
        .map(|r| stratified_folds(&truth, cfg.folds, seed::derive(cfg.seed, &[r as u64, 0])))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.repeats).flat_map(|r| (0..cfg.folds).map(move |f| (r, f))).collect();
    let results: Vec<Vec<(usize, bool)>> = cells
        .par_iter()
        .map(|&(r, f)| run_cell(samples, &folds[r], f, cfg, seed::derive(cfg.seed, &[r as u64, 1 + f as u64])))
        .collect::<Result<_>>()?;
    let mut per_repeat = vec![Confusion::default(); cfg.repeats];
    let (mut correct, mut incorrect) = (Vec::new(), Vec::new());
    for (&(r, _), preds) in cells.iter().zip(&results) {
        let c = &mut per_repeat[r];
        for &(i, p) in preds {
            match (p, truth[i]) {
                (true, true) => {
                    c.tp += 1;
                    correct.push(samples[i].final_size);
                }
                (true, false) => c.fp += 1,
                (false, true) => {
                    c.fn_ += 1;
                    incorrect.push(samples[i].final_size);
                }
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(Metrics::aggregate(&per_repeat, &correct, &incorrect))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Only the training threshold varies; test labels use `th_test`.
    TrainOnly,
    /// Training and test thresholds move together.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub th_train: usize,
    pub th_test: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub points: Vec<SweepPoint>,
}

pub fn threshold_sweep(samples: &[LabeledSample], cfg: &ExperimentConfig, th_train_list: &[usize], mode: SweepMode) -> Result<SweepReport> {
    let points = th_train_list
        .iter()
        .map(|&th| {
            let th_test = match mode {
                SweepMode::TrainOnly => cfg.th_test,
                SweepMode::Both => th,
            };
            let point_cfg = ExperimentConfig {
                th_train: th,
                th_test,
                ..cfg.clone()
            };
            Ok(SweepPoint {
                th_train: th,
                th_test,
                metrics: cross_validate(samples, &point_cfg)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { mode, points })
}

const CSV_HEADER: [&str; 15] = [
    "th_train",
    "th_test",
    "precision",
    "recall",
    "f1",
    "precision_std",
    "recall_std",
    "f1_std",
    "tp",
    "fp",
    "fn",
    "tn",
    "repeats",
    "avg_final_size_correct_viral",
    "avg_final_size_incorrect_viral",
];

fn csv_row(th_train: usize, th_test: usize, m: &Metrics) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        th_train.to_string(),
        th_test.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
        m.precision_std.to_string(),
        m.recall_std.to_string(),
        m.f1_std.to_string(),
        m.confusion.tp.to_string(),
        m.confusion.fp.to_string(),
        m.confusion.fn_.to_string(),
        m.confusion.tn.to_string(),
        m.repeats.to_string(),
        opt(m.avg_final_size_correct_viral),
        opt(m.avg_final_size_incorrect_viral),
    ]
}

impl Metrics {
    pub fn write_csv<W: Write>(&self, w: W, th_train: usize, th_test: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        out.write_record(csv_row(th_train, th_test, self))?;
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for p in &self.points {
            out.write_record(csv_row(p.th_train, p.th_test, &p.metrics))?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
