//! Distribution summaries and the viral vs non-viral measurement study.

mod boxplot;
mod ks;
mod study;

pub use self::boxplot::{box_summary, quantile, BoxSummary};
pub use self::ks::{kolmogorov_survival, ks_two_sample, KsResult};
pub use self::study::{measurement_study, BoxRow, KsRow, StageCount, StudyConfig, StudyMode, StudyReport, SIZE_MEASUREMENTS, TIME_MEASUREMENTS};
