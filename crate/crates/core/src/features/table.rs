use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::groups::{FeatureContext, FeatureGroup};
use crate::cascade::Cascade;
use crate::error::{Error, Result};

/// One eligible cascade's features. Labels are derived on demand from the
/// final size, so the same sample can be labelled under any threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub cascade_id: String,
    pub features: Vec<f64>,
    pub final_size: usize,
}

impl LabeledSample {
    pub fn is_viral(&self, threshold: usize) -> bool {
        self.final_size >= threshold
    }
}

/// Feature matrix of one group with stable column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub group: String,
    pub columns: Vec<String>,
    pub samples: Vec<LabeledSample>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn viral_count(&self, threshold: usize) -> usize {
        self.samples.iter().filter(|s| s.is_viral(threshold)).count()
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, columns: &[&str]) -> Result<FeatureTable> {
        let idx: Vec<usize> = columns
            .iter()
            .map(|c| {
                self.columns
                    .iter()
                    .position(|x| x == c)
                    .ok_or_else(|| Error::InvalidInput(format!("no column `{c}` in group {}", self.group)))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureTable {
            group: self.group.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            samples: self
                .samples
                .iter()
                .map(|s| LabeledSample {
                    cascade_id: s.cascade_id.clone(),
                    features: idx.iter().map(|&i| s.features[i]).collect(),
                    final_size: s.final_size,
                })
                .collect(),
        })
    }

    /// CSV with the feature columns followed by `final_size` and `cascade_id`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<&str> = self.columns.iter().map(String::as_str).chain(["final_size", "cascade_id"]).collect();
        wtr.write_record(&header)?;
        for s in &self.samples {
            let mut rec: Vec<String> = s.features.iter().map(|x| x.to_string()).collect();
            rec.push(s.final_size.to_string());
            rec.push(s.cascade_id.clone());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("feature csv", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, group: &str) -> Result<FeatureTable> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let d = header.len();
        if d < 2 || header[d - 2] != "final_size" || header[d - 1] != "cascade_id" {
            return Err(Error::InvalidInput("feature CSV must end with `final_size,cascade_id` columns".into()));
        }
        let columns = header[..d - 2].to_vec();
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |m: String| Error::Parse {
                path: format!("{group} features"),
                line: i + 2,
                message: m,
            };
            let features = rec
                .iter()
                .take(d - 2)
                .map(|x| x.parse::<f64>().map_err(|_| bad(format!("invalid number `{x}`"))))
                .collect::<Result<Vec<f64>>>()?;
            let final_size = rec[d - 2].parse().map_err(|_| bad(format!("invalid final size `{}`", &rec[d - 2])))?;
            samples.push(LabeledSample {
                cascade_id: rec[d - 1].to_string(),
                features,
                final_size,
            });
        }
        Ok(FeatureTable {
            group: group.to_string(),
            columns,
            samples,
        })
    }
}

/// Extracts `group` for every cascade in parallel. Ineligible cascades are
/// skipped and counted; any other failure aborts.
pub fn extract_table(group: &dyn FeatureGroup, cascades: &[Cascade], ctx: &FeatureContext<'_>) -> Result<(FeatureTable, usize)> {
    let rows: Vec<Result<Option<LabeledSample>>> = cascades
        .par_iter()
        .map(|c| match group.extract(c, ctx) {
            Ok(features) => Ok(Some(LabeledSample {
                cascade_id: c.root_message_id.clone(),
                features,
                final_size: c.final_size(),
            })),
            Err(Error::NotEligible(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut samples = Vec::new();
    let mut skipped = 0;
    for r in rows {
        match r? {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }
    Ok((
        FeatureTable {
            group: group.name().to_string(),
            columns: group.columns(),
            samples,
        },
        skipped,
    ))
}
