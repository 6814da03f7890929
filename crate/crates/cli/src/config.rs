use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cascade_scope::cascade::DEFAULT_LAMBDA_MINUTES;
use cascade_scope::features::FeatureSettings;
use cascade_scope::graph::TimeWindow;
use cascade_scope::ml::{ExperimentConfig, RandomizedLogisticConfig, SweepMode};
use cascade_scope::synth::SynthConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Repost log; defaults to the log written by `synth`.
    pub log: Option<PathBuf>,
    /// Partition file for the `file` community method.
    pub partition: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            log: None,
            partition: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunityConfig {
    pub method: String,
    pub max_passes: usize,
    pub max_iters: usize,
}

impl Default for CommunityConfig {
    fn default() -> Self {
        Self {
            method: "louvain".into(),
            max_passes: 32,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySettings {
    pub m_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub alpha: f64,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            m_list: vec![10, 30, 50, 100, 200],
            t_list: vec![40.0, 60.0, 100.0, 150.0, 300.0],
            alpha: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub th_train_list: Vec<usize>,
    pub mode: SweepMode,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            th_train_list: vec![300, 400, 500, 600, 700],
            mode: SweepMode::TrainOnly,
        }
    }
}

/// The single JSON document driving every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    /// Reject malformed log lines instead of skipping them.
    pub strict: bool,
    pub graph_window: TimeWindow,
    pub cascade_window: TimeWindow,
    pub lambda_minutes: f64,
    pub th_train: usize,
    pub th_test: usize,
    pub community: CommunityConfig,
    pub features: FeatureSettings,
    /// Feature groups written by `featurize`.
    pub groups: Vec<String>,
    /// Feature group used by `train` and `sweep`.
    pub group: String,
    pub study: StudySettings,
    pub ml: ExperimentConfig,
    pub sweep: SweepSettings,
    pub weights: RandomizedLogisticConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            paths: Paths::default(),
            strict: false,
            graph_window: TimeWindow::ALL,
            cascade_window: TimeWindow::ALL,
            lambda_minutes: DEFAULT_LAMBDA_MINUTES,
            th_train: 500,
            th_test: 500,
            community: CommunityConfig::default(),
            features: FeatureSettings::default(),
            groups: ["A_m", "A_t", "C_m", "C_t", "D_m", "D_t"].iter().map(|s| s.to_string()).collect(),
            group: "A_m".into(),
            study: StudySettings::default(),
            ml: ExperimentConfig::default(),
            sweep: SweepSettings::default(),
            weights: RandomizedLogisticConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub th_train: Option<usize>,
    pub th_test: Option<usize>,
    pub lambda: Option<f64>,
    pub method: Option<String>,
    pub group: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config file {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("invalid config file {}", p.display()))
            }
        }
    }

    /// Applies overrides, pushes the master seed and thresholds into the
    /// module configs, and validates the result.
    pub fn effective(mut self, o: &Overrides) -> Result<Self> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.th_train {
            self.th_train = t;
        }
        if let Some(t) = o.th_test {
            self.th_test = t;
        }
        if let Some(l) = o.lambda {
            self.lambda_minutes = l;
        }
        if let Some(m) = &o.method {
            self.community.method = m.clone();
        }
        if let Some(g) = &o.group {
            self.group = g.clone();
        }
        if let Some(d) = &o.out_dir {
            self.paths.out_dir = d.clone();
        }
        self.ml.th_train = self.th_train;
        self.ml.th_test = self.th_test;
        self.ml.seed = self.seed;
        self.weights.seed = self.seed;
        self.synth.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_minutes >= 0.0 && self.lambda_minutes.is_finite()) {
            bail!("config field `lambda_minutes` must be a non-negative number, got {}", self.lambda_minutes);
        }
        if self.th_train == 0 || self.th_test == 0 {
            bail!("config fields `th_train` and `th_test` must be positive");
        }
        if self.graph_window.start > self.graph_window.end {
            bail!("config field `graph_window` has start after end");
        }
        if self.cascade_window.start > self.cascade_window.end {
            bail!("config field `cascade_window` has start after end");
        }
        if self.features.m_list.is_empty() || self.features.t_list.is_empty() {
            bail!("config fields `features.m_list` and `features.t_list` must not be empty");
        }
        self.ml.validate().context("config field `ml`")?;
        Ok(())
    }

    pub fn out(&self, stage: &str) -> PathBuf {
        self.paths.out_dir.join(stage)
    }
}
