use std::fmt;
use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boxplot::{box_summary, BoxSummary};
use super::ks::{ks_two_sample, KsResult};
use crate::cascade::{snapshot_by_size, snapshot_by_time, Cascade, DEFAULT_LAMBDA_MINUTES};
use crate::community::Partition;
use crate::error::Result;
use crate::features::{measure_snapshot, SnapshotMeasures};
use crate::graph::SocialGraph;

pub const SIZE_MEASUREMENTS: [&str; 12] = [
    "avg_time", "n_comm_U", "n_comm_F", "n_comm_N", "gini_U", "gini_F", "gini_N", "overlap_U_F", "overlap_U_N", "overlap_F_N", "size_F", "size_N",
];

pub const TIME_MEASUREMENTS: [&str; 12] = [
    "size_U", "n_comm_U", "n_comm_F", "n_comm_N", "gini_U", "gini_F", "gini_N", "overlap_U_F", "overlap_U_N", "overlap_F_N", "size_F", "size_N",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyMode {
    Size,
    Time,
}

impl fmt::Display for StudyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyMode::Size => "size",
            StudyMode::Time => "time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub m_list: Vec<usize>,
    pub t_list: Vec<f64>,
    /// Final size at which a cascade counts as viral.
    pub threshold: usize,
    pub lambda: f64,
    /// Adopters required at `t` for a time-based stage.
    pub min_adopters: usize,
    /// Significance level reported next to each KS test.
    pub alpha: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            m_list: vec![10, 30, 50, 100, 200],
            t_list: vec![40.0, 60.0, 100.0, 150.0, 300.0],
            threshold: 500,
            lambda: DEFAULT_LAMBDA_MINUTES,
            min_adopters: 5,
            alpha: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub mode: StudyMode,
    pub stage: f64,
    pub viral: usize,
    pub non_viral: usize,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub mode: StudyMode,
    pub stage: f64,
    pub measurement: String,
    pub viral: bool,
    pub summary: BoxSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub mode: StudyMode,
    pub stage: f64,
    pub measurement: String,
    pub result: KsResult,
    pub significant: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub stages: Vec<StageCount>,
    pub boxes: Vec<BoxRow>,
    pub ks: Vec<KsRow>,
    pub warnings: Vec<String>,
}

fn size_values(m: &SnapshotMeasures) -> [f64; 12] {
    let mut v = common_values(m);
    v[0] = m.avg_time.unwrap_or(f64::NAN);
    v
}

fn time_values(m: &SnapshotMeasures) -> [f64; 12] {
    let mut v = common_values(m);
    v[0] = m.size_u as f64;
    v
}

fn common_values(m: &SnapshotMeasures) -> [f64; 12] {
    [
        0.0,
        m.n_comm_u as f64,
        m.n_comm_f as f64,
        m.n_comm_n as f64,
        m.gini_u,
        m.gini_f,
        m.gini_n,
        m.overlap_u_f as f64,
        m.overlap_u_n as f64,
        m.overlap_f_n as f64,
        m.size_f as f64,
        m.size_n as f64,
    ]
}

/// Measurement values of every eligible cascade at one stage, tagged viral or not.
fn stage_samples(
    cascades: &[Cascade],
    g: &SocialGraph,
    p: &Partition,
    cfg: &StudyConfig,
    mode: StudyMode,
    stage: f64,
) -> Result<Vec<(bool, [f64; 12])>> {
    let rows: Vec<Option<(bool, [f64; 12])>> = cascades
        .par_iter()
        .map(|c| {
            let viral = c.final_size() >= cfg.threshold;
            match mode {
                StudyMode::Size => {
                    let m = stage as usize;
                    if c.final_size() < m {
                        return Ok(None);
                    }
                    let s = snapshot_by_size(c, g, m, cfg.lambda)?;
                    Ok(Some((viral, size_values(&measure_snapshot(&s, p)?))))
                }
                StudyMode::Time => {
                    let s = snapshot_by_time(c, g, stage, cfg.lambda)?;
                    if s.adopters.len() < cfg.min_adopters {
                        return Ok(None);
                    }
                    Ok(Some((viral, time_values(&measure_snapshot(&s, p)?))))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Per-stage box summaries of each measurement for the viral and non-viral
/// classes, and a two-sample KS test between the classes.
pub fn measurement_study(cascades: &[Cascade], g: &SocialGraph, p: &Partition, cfg: &StudyConfig) -> Result<StudyReport> {
    let mut report = StudyReport::default();
    let stages = cfg
        .m_list
        .iter()
        .map(|&m| (StudyMode::Size, m as f64))
        .chain(cfg.t_list.iter().map(|&t| (StudyMode::Time, t)));
    for (mode, stage) in stages {
        let samples = stage_samples(cascades, g, p, cfg, mode, stage)?;
        let viral = samples.iter().filter(|(v, _)| *v).count();
        let non_viral = samples.len() - viral;
        let skipped = viral == 0 || non_viral == 0;
        report.stages.push(StageCount {
            mode,
            stage,
            viral,
            non_viral,
            skipped,
        });
        if skipped {
            let msg = format!("{mode} stage {stage}: {viral} viral and {non_viral} non-viral cascades, stage skipped");
            warn!("{msg}");
            report.warnings.push(msg);
            continue;
        }
        let names = match mode {
            StudyMode::Size => &SIZE_MEASUREMENTS,
            StudyMode::Time => &TIME_MEASUREMENTS,
        };
        for (k, name) in names.iter().enumerate() {
            let pick = |want: bool| -> Vec<f64> { samples.iter().filter(|(v, _)| *v == want).map(|(_, x)| x[k]).collect() };
            let (a, b) = (pick(true), pick(false));
            for (is_viral, xs) in [(true, &a), (false, &b)] {
                report.boxes.push(BoxRow {
                    mode,
                    stage,
                    measurement: name.to_string(),
                    viral: is_viral,
                    summary: box_summary(xs)?,
                });
            }
            let result = ks_two_sample(&a, &b)?;
            report.ks.push(KsRow {
                mode,
                stage,
                measurement: name.to_string(),
                significant: result.p_value < cfg.alpha,
                result,
            });
        }
    }
    Ok(report)
}

fn class(viral: bool) -> &'static str {
    if viral {
        "viral"
    } else {
        "non_viral"
    }
}

impl StudyReport {
    pub fn write_boxes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode", "stage", "measurement", "class", "n", "mean", "median", "q1", "q3", "lower_whisker", "upper_whisker"])?;
        for r in &self.boxes {
            let s = &r.summary;
            out.write_record([
                r.mode.to_string(),
                r.stage.to_string(),
                r.measurement.clone(),
                class(r.viral).to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.median.to_string(),
                s.q1.to_string(),
                s.q3.to_string(),
                s.lower_whisker.to_string(),
                s.upper_whisker.to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_ks_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode", "stage", "measurement", "n_viral", "n_non_viral", "statistic", "p_value", "significant"])?;
        for r in &self.ks {
            out.write_record([
                r.mode.to_string(),
                r.stage.to_string(),
                r.measurement.clone(),
                r.result.n1.to_string(),
                r.result.n2.to_string(),
                r.result.statistic.to_string(),
                r.result.p_value.to_string(),
                r.significant.to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Eligible cascades per stage and class.
    pub fn write_stages_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode", "stage", "viral", "non_viral", "skipped"])?;
        for r in &self.stages {
            out.write_record([r.mode.to_string(), r.stage.to_string(), r.viral.to_string(), r.non_viral.to_string(), r.skipped.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
