//! Learns which Java files a project is likely to migrate to Kotlin next.
//!
//! The pipeline has four stages, each in its own module:
//!
//! * [`miner`] parses name-status commit logs and detects Java to Kotlin
//!   file migrations.
//! * [`metrics`] lexes and structurally parses Java sources and computes the
//!   56-feature vector describing each file.
//! * [`ltr`] builds ranking queries from migration commits and trains a
//!   pairwise LambdaMART model of gradient-boosted regression trees.
//! * [`eval`] scores rankings with AP@K / MAP@K and implements the random and
//!   guideline baselines.

pub mod eval;
pub mod ltr;
pub mod metrics;
pub mod miner;
pub mod snapshot;

pub use metrics::{extract_features, Feature, FeatureVector, FEATURE_COUNT};
pub use snapshot::ProjectSnapshot;
