//! Feature groups for the size-based and time-based prediction tasks.
//!
//! | group | contents |
//! |-------|----------|
//! | `A_m` | diversity measures at each `m`, plus mean adoption time at the baseline size |
//! | `A_t` | diversity measures and set sizes at each `t` |
//! | `C_m` | seed nodal features plus mean adoption time |
//! | `C_t` | seed nodal features plus adopters at the baseline time |
//! | `D_m` | mean adoption time at the baseline size |
//! | `D_t` | adopters at the baseline time |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::measures::{avg_time_to_adoption, measure_snapshot, SnapshotMeasures};
use crate::cascade::{snapshot_by_size, snapshot_by_time, Cascade};
use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::{NodalFeatureTable, NodalFeatures, SocialGraph};

/// Read-only inputs shared by every extraction.
#[derive(Clone, Copy)]
pub struct FeatureContext<'a> {
    pub graph: &'a SocialGraph,
    pub partition: &'a Partition,
    pub lambda: f64,
    /// Needed by the nodal (`C_*`) groups only.
    pub nodal: Option<&'a NodalFeatureTable>,
}

impl<'a> FeatureContext<'a> {
    pub fn new(graph: &'a SocialGraph, partition: &'a Partition, lambda: f64) -> Self {
        Self {
            graph,
            partition,
            lambda,
            nodal: None,
        }
    }

    pub fn with_nodal(mut self, nodal: &'a NodalFeatureTable) -> Self {
        self.nodal = Some(nodal);
        self
    }
}

/// A named, fixed-width feature extractor.
pub trait FeatureGroup: Send + Sync {
    fn name(&self) -> &str;

    fn columns(&self) -> Vec<String>;

    /// Feature values in column order; [`Error::NotEligible`] when the cascade
    /// does not qualify for this group.
    fn extract(&self, c: &Cascade, ctx: &FeatureContext<'_>) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSettings {
    pub m_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub baseline_m: usize,
    pub baseline_t: f64,
    /// Minimum adopters at `baseline_t` for time-based eligibility.
    pub min_adopters: usize,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            m_list: vec![30, 50],
            t_list: vec![40.0, 60.0],
            baseline_m: 50,
            baseline_t: 60.0,
            min_adopters: 5,
        }
    }
}

fn fmt_t(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

const DIVERSITY: [&str; 8] = [
    "n_comm_F", "n_comm_N", "gini_U", "gini_F", "gini_N", "overlap_U_F", "overlap_U_N", "overlap_F_N",
];

fn diversity_values(m: &SnapshotMeasures) -> [f64; 8] {
    [
        m.n_comm_f as f64,
        m.n_comm_n as f64,
        m.gini_u,
        m.gini_f,
        m.gini_n,
        m.overlap_u_f as f64,
        m.overlap_u_n as f64,
        m.overlap_f_n as f64,
    ]
}

/// Size-based eligibility: the cascade must reach `m` adopters.
fn require_size(c: &Cascade, m: usize) -> Result<()> {
    if c.final_size() < m {
        return Err(Error::NotEligible(format!(
            "cascade `{}` has final size {} < {m}",
            c.root_message_id,
            c.final_size()
        )));
    }
    Ok(())
}

/// Time-based eligibility: at least `min` adopters by minute `t`.
fn require_adopters(c: &Cascade, t: f64, min: usize) -> Result<usize> {
    let k = c.adoptions.partition_point(|a| a.time <= t);
    if k < min {
        return Err(Error::NotEligible(format!(
            "cascade `{}` has {k} adopters at {} min, needs {min}",
            c.root_message_id,
            fmt_t(t)
        )));
    }
    Ok(k)
}

fn seed_nodal(c: &Cascade, ctx: &FeatureContext<'_>) -> Result<NodalFeatures> {
    let table = ctx
        .nodal
        .ok_or_else(|| Error::InvalidInput("nodal feature table required for seed features".into()))?;
    // seeds outside the historical graph have no centrality
    Ok(table.get(c.seed_adopter()).unwrap_or(NodalFeatures {
        k_shell: 0,
        out_degree: 0,
        in_degree: 0,
        pagerank: 0.0,
        eigenvector: 0.0,
    }))
}

/// Group `A_m`.
#[derive(Debug, Clone)]
pub struct SizeDiversityFeatures {
    pub m_list: Vec<usize>,
    pub baseline_m: usize,
}

impl FeatureGroup for SizeDiversityFeatures {
    fn name(&self) -> &str {
        "A_m"
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .m_list
            .iter()
            .flat_map(|m| DIVERSITY.iter().map(move |d| format!("{d}_m{m}")).chain(["size_F", "size_N"].iter().map(move |d| format!("{d}_m{m}"))))
            .collect();
        cols.push(format!("avg_time_m{}", self.baseline_m));
        cols
    }

    fn extract(&self, c: &Cascade, ctx: &FeatureContext<'_>) -> Result<Vec<f64>> {
        let needed = self.m_list.iter().copied().max().unwrap_or(0).max(self.baseline_m);
        require_size(c, needed)?;
        let mut out = Vec::with_capacity(self.m_list.len() * 10 + 1);
        for &m in &self.m_list {
            let s = snapshot_by_size(c, ctx.graph, m, ctx.lambda)?;
            let meas = measure_snapshot(&s, ctx.partition)?;
            out.extend(diversity_values(&meas));
            out.push(meas.size_f as f64);
            out.push(meas.size_n as f64);
        }
        let base = snapshot_by_size(c, ctx.graph, self.baseline_m, ctx.lambda)?;
        out.push(avg_time_to_adoption(&base)?);
        Ok(out)
    }
}

/// Group `A_t`.
#[derive(Debug, Clone)]
pub struct TimeDiversityFeatures {
    pub t_list: Vec<f64>,
    pub baseline_t: f64,
    pub min_adopters: usize,
}

impl FeatureGroup for TimeDiversityFeatures {
    fn name(&self) -> &str {
        "A_t"
    }

    fn columns(&self) -> Vec<String> {
        self.t_list
            .iter()
            .flat_map(|&t| {
                let t = fmt_t(t);
                DIVERSITY
                    .iter()
                    .chain(["size_U", "size_F", "size_N"].iter())
                    .map(move |d| format!("{d}_t{t}"))
            })
            .collect()
    }

    fn extract(&self, c: &Cascade, ctx: &FeatureContext<'_>) -> Result<Vec<f64>> {
        require_adopters(c, self.baseline_t, self.min_adopters)?;
        let mut out = Vec::with_capacity(self.t_list.len() * 11);
        for &t in &self.t_list {
            let s = snapshot_by_time(c, ctx.graph, t, ctx.lambda)?;
            let meas = measure_snapshot(&s, ctx.partition)?;
            out.extend(diversity_values(&meas));
            out.extend([meas.size_u as f64, meas.size_f as f64, meas.size_n as f64]);
        }
        Ok(out)
    }
}

/// Group `D_m`.
#[derive(Debug, Clone)]
pub struct SizeBaseline {
    pub m: usize,
}

impl FeatureGroup for SizeBaseline {
    fn name(&self) -> &str {
        "D_m"
    }

    fn columns(&self) -> Vec<String> {
        vec![format!("avg_time_m{}", self.m)]
    }

    fn extract(&self, c: &Cascade, ctx: &FeatureContext<'_>) -> Result<Vec<f64>> {
        let s = snapshot_by_size(c, ctx.graph, self.m, ctx.lambda)?;
        Ok(vec![avg_time_to_adoption(&s)?])
    }
}

/// Group `D_t`.
#[derive(Debug, Clone)]
pub struct TimeBaseline {
    pub t: f64,
    pub min_adopters: usize,
}

impl FeatureGroup for TimeBaseline {
    fn name(&self) -> &str {
        "D_t"
    }

    fn columns(&self) -> Vec<String> {
        vec![format!("size_U_t{}", fmt_t(self.t))]
    }

    fn extract(&self, c: &Cascade, _ctx: &FeatureContext<'_>) -> Result<Vec<f64>> {
        Ok(vec![require_adopters(c, self.t, self.min_adopters)? as f64])
    }
}

/// Groups `C_m` / `C_t`: seed nodal features followed by a baseline group.
pub struct SeedNodalFeatures {
    name: String,
    baseline: Box<dyn FeatureGroup>,
}

impl SeedNodalFeatures {
    pub fn new(name: &str, baseline: Box<dyn FeatureGroup>) -> Self {
        Self {
            name: name.to_string(),
            baseline,
        }
    }
}

impl FeatureGroup for SeedNodalFeatures {
    fn name(&self) -> &str {
        &self.name
    }

    fn columns(&self) -> Vec<String> {
        NodalFeatures::NAMES.iter().map(|s| s.to_string()).chain(self.baseline.columns()).collect()
    }

    fn extract(&self, c: &Cascade, ctx: &FeatureContext<'_>) -> Result<Vec<f64>> {
        let tail = self.baseline.extract(c, ctx)?;
        let mut out = seed_nodal(c, ctx)?.to_vec();
        out.extend(tail);
        Ok(out)
    }
}

type GroupFactory = Box<dyn Fn(&FeatureSettings) -> Box<dyn FeatureGroup> + Send + Sync>;

/// Feature groups by name.
pub struct FeatureGroupRegistry {
    factories: BTreeMap<String, GroupFactory>,
}

impl FeatureGroupRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("A_m", |s| {
            Box::new(SizeDiversityFeatures {
                m_list: s.m_list.clone(),
                baseline_m: s.baseline_m,
            })
        });
        r.register("A_t", |s| {
            Box::new(TimeDiversityFeatures {
                t_list: s.t_list.clone(),
                baseline_t: s.baseline_t,
                min_adopters: s.min_adopters,
            })
        });
        r.register("D_m", |s| Box::new(SizeBaseline { m: s.baseline_m }));
        r.register("D_t", |s| {
            Box::new(TimeBaseline {
                t: s.baseline_t,
                min_adopters: s.min_adopters,
            })
        });
        r.register("C_m", |s| Box::new(SeedNodalFeatures::new("C_m", Box::new(SizeBaseline { m: s.baseline_m }))));
        r.register("C_t", |s| {
            Box::new(SeedNodalFeatures::new(
                "C_t",
                Box::new(TimeBaseline {
                    t: s.baseline_t,
                    min_adopters: s.min_adopters,
                }),
            ))
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&FeatureSettings) -> Box<dyn FeatureGroup> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, settings: &FeatureSettings) -> Result<Box<dyn FeatureGroup>> {
        self.factories
            .get(name)
            .map(|f| f(settings))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "feature group",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }
}

impl Default for FeatureGroupRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

pub fn extract_size_features(c: &Cascade, g: &SocialGraph, p: &Partition, m_list: &[usize], lambda: f64) -> Result<Vec<f64>> {
    let group = SizeDiversityFeatures {
        m_list: m_list.to_vec(),
        baseline_m: FeatureSettings::default().baseline_m,
    };
    group.extract(c, &FeatureContext::new(g, p, lambda))
}

pub fn extract_time_features(c: &Cascade, g: &SocialGraph, p: &Partition, t_list: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let d = FeatureSettings::default();
    let group = TimeDiversityFeatures {
        t_list: t_list.to_vec(),
        baseline_t: d.baseline_t,
        min_adopters: d.min_adopters,
    };
    group.extract(c, &FeatureContext::new(g, p, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineMode {
    #[serde(rename = "C_m")]
    NodalSize,
    #[serde(rename = "C_t")]
    NodalTime,
    #[serde(rename = "D_m")]
    Size,
    #[serde(rename = "D_t")]
    Time,
}

impl BaselineMode {
    pub fn group_name(self) -> &'static str {
        match self {
            BaselineMode::NodalSize => "C_m",
            BaselineMode::NodalTime => "C_t",
            BaselineMode::Size => "D_m",
            BaselineMode::Time => "D_t",
        }
    }
}

pub fn extract_baseline_features(c: &Cascade, ctx: &FeatureContext<'_>, mode: BaselineMode) -> Result<Vec<f64>> {
    FeatureGroupRegistry::with_builtins()
        .create(mode.group_name(), &FeatureSettings::default())?
        .extract(c, ctx)
}
