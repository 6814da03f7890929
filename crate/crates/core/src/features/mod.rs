//! Structural-diversity measurements and the feature groups built on them.

mod groups;
mod measures;
mod table;

pub use self::groups::{
    extract_baseline_features, extract_size_features, extract_time_features, BaselineMode, FeatureContext, FeatureGroup, FeatureGroupRegistry, FeatureSettings,
    SeedNodalFeatures, SizeBaseline, SizeDiversityFeatures, TimeBaseline, TimeDiversityFeatures,
};
pub use self::measures::{avg_time_to_adoption, communities_of, gini_impurity, gini_of_profile, measure_snapshot, overlap, overlap_of_profiles, CommunityProfile, SnapshotMeasures};
pub use self::table::{extract_table, FeatureTable, LabeledSample};
