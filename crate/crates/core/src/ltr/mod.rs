//! Pairwise LambdaMART over migration queries.
//!
//! Every migration commit becomes a query whose documents are the `.java`
//! files of the commit's parent version; a document is relevant (label 1)
//! when the commit migrated it. The ranker is a sum of regression trees
//! fitted to ΔNDCG-weighted pairwise logistic gradients.

mod lambda;
mod model;
mod tree;

pub use lambda::{compute_lambdas, delta_ndcg, pairwise_loss};
pub use model::{
    deserialize_model, feature_importance, predict, rank, serialize_model, train, train_with_report, RankerModel,
    TrainReport, MODEL_SCHEMA,
};
pub use tree::{fit_tree, Branch, Node, RegressionTree};

use crate::metrics::catalog::AndroidCatalog;
use crate::metrics::{FeatureExtractor, FeatureVector, FEATURE_COUNT};
use crate::miner::MigrationEvent;
use crate::snapshot::ProjectSnapshot;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LtrError {
    #[error("no feature snapshot for commit {0}")]
    MissingSnapshot(String),
    #[error("no trainable queries")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} features, found {found}")]
    FeatureArityMismatch { expected: usize, found: usize },
    #[error("model has no splits")]
    NoSplits,
    #[error("unsupported model schema {found:?}")]
    SchemaVersionMismatch { found: Option<u64> },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDocument {
    pub doc_id: String,
    pub features: Vec<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingQuery {
    pub query_id: String,
    pub documents: Vec<RankingDocument>,
}

impl RankingQuery {
    pub fn positives(&self) -> usize {
        self.documents.iter().filter(|d| d.label == 1).count()
    }

    /// A query without both a relevant and an irrelevant document has no pairs.
    pub fn is_degenerate(&self) -> bool {
        let p = self.positives();
        p == 0 || p == self.documents.len()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.documents.iter().map(|d| d.label).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub reg_lambda: f64,
    pub sigma: f64,
    pub base_score: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            min_child_weight: 1.0,
            reg_lambda: 1.0,
            sigma: 1.0,
            base_score: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LtrError> {
        let bad = |msg: &str| Err(LtrError::InvalidConfig(msg.to_string()));
        if self.rounds == 0 {
            return bad("rounds must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight must be a finite non-negative number");
        }
        if !(self.reg_lambda >= 0.0 && self.reg_lambda.is_finite()) {
            return bad("reg_lambda must be a finite non-negative number");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if !self.base_score.is_finite() {
            return bad("base_score must be finite");
        }
        Ok(())
    }
}

/// Queries plus a note for every query left out.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub queries: Vec<RankingQuery>,
    pub diagnostics: Vec<String>,
}

/// Feature vectors of one parent version, keyed by path.
pub type SnapshotFeatures = BTreeMap<String, FeatureVector>;

/// One query per event, keeping degenerate queries (evaluation input).
pub fn build_queries(
    events: &[MigrationEvent],
    snapshots: &BTreeMap<String, SnapshotFeatures>,
) -> Result<Vec<RankingQuery>, LtrError> {
    events
        .iter()
        .map(|event| {
            let files = snapshots.get(&event.sha).ok_or_else(|| LtrError::MissingSnapshot(event.sha.clone()))?;
            let documents = files
                .iter()
                .filter(|(path, _)| path.ends_with(".java"))
                .map(|(path, fv)| RankingDocument {
                    doc_id: path.clone(),
                    features: fv.as_slice().to_vec(),
                    label: u8::from(event.is_migrated(path)),
                })
                .collect();
            Ok(RankingQuery { query_id: event.sha.clone(), documents })
        })
        .collect()
}

/// Training queries: like [`build_queries`] minus degenerate queries.
pub fn build_dataset(
    events: &[MigrationEvent],
    snapshots: &BTreeMap<String, SnapshotFeatures>,
) -> Result<Dataset, LtrError> {
    let (queries, diagnostics) = drop_degenerate(build_queries(events, snapshots)?);
    Ok(Dataset { queries, diagnostics })
}

/// One `.java` file of a commit's parent version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileFeatures {
    pub path: String,
    pub label: u8,
    pub features: FeatureVector,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// The per-commit feature file: every `.java` file of the parent version,
/// labeled by whether the commit migrated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitFeatures {
    pub sha: String,
    pub files: Vec<FileFeatures>,
}

impl CommitFeatures {
    pub fn extract(event: &MigrationEvent, snapshot: &ProjectSnapshot, catalog: &AndroidCatalog) -> Self {
        let index = snapshot.index();
        let extractor = FeatureExtractor::new(&index, catalog);
        let files = snapshot
            .files
            .iter()
            .filter(|(path, _)| path.ends_with(".java"))
            .map(|(path, source)| {
                let ex = extractor.extract(path, source);
                FileFeatures {
                    path: path.clone(),
                    label: u8::from(event.is_migrated(path)),
                    features: ex.features,
                    diagnostics: ex.diagnostics,
                }
            })
            .collect();
        Self { sha: event.sha.clone(), files }
    }

    pub fn to_query(&self) -> RankingQuery {
        RankingQuery {
            query_id: self.sha.clone(),
            documents: self
                .files
                .iter()
                .map(|f| RankingDocument {
                    doc_id: f.path.clone(),
                    features: f.features.as_slice().to_vec(),
                    label: f.label,
                })
                .collect(),
        }
    }
}

pub(crate) fn drop_degenerate(queries: Vec<RankingQuery>) -> (Vec<RankingQuery>, Vec<String>) {
    let mut kept = Vec::new();
    let mut diagnostics = Vec::new();
    for q in queries {
        if q.is_degenerate() {
            let why = if q.positives() == 0 { "no migrated file" } else { "no unmigrated file" };
            diagnostics.push(format!("query {} dropped: {why}", q.query_id));
        } else {
            kept.push(q);
        }
    }
    (kept, diagnostics)
}

pub(crate) fn check_arity(features: &[f64]) -> Result<(), LtrError> {
    if features.len() == FEATURE_COUNT {
        Ok(())
    } else {
        Err(LtrError::FeatureArityMismatch { expected: FEATURE_COUNT, found: features.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::MigrationPair;

    fn event(sha: &str, java: &[&str]) -> MigrationEvent {
        MigrationEvent {
            sha: sha.into(),
            pairs: java
                .iter()
                .map(|j| MigrationPair { java: j.to_string(), kotlin: j.replace(".java", ".kt") })
                .collect(),
            ambiguous: false,
        }
    }

    fn snapshot(paths: &[&str]) -> SnapshotFeatures {
        paths.iter().map(|p| (p.to_string(), FeatureVector::default())).collect()
    }

    #[test]
    fn labels_follow_the_migrated_files() {
        let snaps = BTreeMap::from([("c1".to_string(), snapshot(&["File1.java", "File2.java", "File3.java"]))]);
        let ds = build_dataset(&[event("c1", &["File1.java"])], &snaps).unwrap();
        let labels: Vec<_> = ds.queries[0].documents.iter().map(|d| (d.doc_id.as_str(), d.label)).collect();
        assert_eq!(labels, vec![("File1.java", 1), ("File2.java", 0), ("File3.java", 0)]);
        assert_eq!(ds.queries[0].documents[0].features.len(), 56);
    }

    #[test]
    fn degenerate_queries_are_dropped_with_a_note() {
        let snaps = BTreeMap::from([
            ("a".to_string(), snapshot(&["A.java"])),
            ("b".to_string(), snapshot(&["A.java", "B.java"])),
            ("c".to_string(), snapshot(&["A.java", "B.java", "C.java"])),
        ]);
        let events = [event("a", &["A.java"]), event("b", &["B.java"]), event("c", &["C.java"])];
        let ds = build_dataset(&events, &snaps).unwrap();
        assert_eq!(ds.queries.len(), 2);
        assert_eq!(ds.diagnostics.len(), 1);
        let all = build_queries(&events, &snaps).unwrap();
        assert_eq!(all.iter().map(|q| q.documents.len()).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn commit_features_label_and_convert() {
        let snap = ProjectSnapshot::from_files([
            ("File1.java", "class File1 {}"),
            ("File2.java", "class File2 { int x; }"),
            ("File3.java", "class File3 {}"),
            ("notes.txt", "x"),
        ]);
        let cf = CommitFeatures::extract(&event("c1", &["File1.java"]), &snap, &AndroidCatalog::default());
        let labels: Vec<_> = cf.files.iter().map(|f| (f.path.as_str(), f.label)).collect();
        assert_eq!(labels, vec![("File1.java", 1), ("File2.java", 0), ("File3.java", 0)]);
        let json = serde_json::to_string(&cf).unwrap();
        let back: CommitFeatures = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cf);
        let q = back.to_query();
        assert_eq!(q.query_id, "c1");
        assert_eq!(q.documents[1].features[2], 1.0);
    }

    #[test]
    fn missing_snapshot_is_an_error() {
        let err = build_dataset(&[event("zz", &["A.java"])], &BTreeMap::new()).unwrap_err();
        assert_eq!(err, LtrError::MissingSnapshot("zz".into()));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for cfg in [
            TrainConfig { rounds: 0, ..Default::default() },
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { learning_rate: 1.5, ..Default::default() },
            TrainConfig { max_depth: 0, ..Default::default() },
            TrainConfig { sigma: 0.0, ..Default::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(LtrError::InvalidConfig(_))), "{cfg:?}");
        }
    }
}
