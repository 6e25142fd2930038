use super::lambda::{compute_lambdas, pairwise_loss};
use super::tree::{fit_tree, Node, RegressionTree};
use super::{check_arity, drop_degenerate, LtrError, RankingDocument, RankingQuery, TrainConfig};
use crate::metrics::{Feature, FEATURE_COUNT, FEATURE_NAMES};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MODEL_SCHEMA: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerModel {
    pub schema: u64,
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    pub base_score: f64,
    pub learning_rate: f64,
    /// SHA-256 of the training queries.
    pub fingerprint: String,
    pub trees: Vec<RegressionTree>,
}

impl RankerModel {
    pub fn new(config: TrainConfig, fingerprint: String, trees: Vec<RegressionTree>) -> Self {
        Self {
            schema: MODEL_SCHEMA,
            base_score: config.base_score,
            learning_rate: config.learning_rate,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            config,
            fingerprint,
            trees,
        }
    }

    pub fn score(&self, features: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.output(features)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    /// Training loss before the first round and after every round.
    pub loss: Vec<f64>,
    pub diagnostics: Vec<String>,
}

fn fingerprint(queries: &[RankingQuery]) -> String {
    let mut h = Sha256::new();
    for q in queries {
        h.update(q.query_id.as_bytes());
        h.update([0]);
        for d in &q.documents {
            h.update(d.doc_id.as_bytes());
            h.update([0, d.label]);
            for v in &d.features {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.update([0xff]);
    }
    hex::encode(h.finalize())
}

pub fn train(queries: &[RankingQuery], config: &TrainConfig) -> Result<RankerModel, LtrError> {
    train_with_report(queries, config).map(|(m, _)| m)
}

/// Boosting loop. Training is fully deterministic; `config.seed` is recorded
/// in the model but no step draws random numbers.
pub fn train_with_report(
    queries: &[RankingQuery],
    config: &TrainConfig,
) -> Result<(RankerModel, TrainReport), LtrError> {
    config.validate()?;
    for d in queries.iter().flat_map(|q| &q.documents) {
        check_arity(&d.features)?;
        if d.label > 1 {
            return Err(LtrError::InvalidConfig(format!("label {} of {} is not 0 or 1", d.label, d.doc_id)));
        }
    }
    let (queries, diagnostics) = drop_degenerate(queries.to_vec());
    if queries.is_empty() {
        return Err(LtrError::EmptyDataset);
    }

    let rows: Vec<&[f64]> = queries.iter().flat_map(|q| q.documents.iter().map(|d| d.features.as_slice())).collect();
    let labels: Vec<Vec<u8>> = queries.iter().map(RankingQuery::labels).collect();
    let mut scores = vec![config.base_score; rows.len()];
    let mut grad = vec![0.0; rows.len()];
    let mut hess = vec![0.0; rows.len()];
    let total_loss = |scores: &[f64]| {
        let mut offset = 0;
        let mut loss = 0.0;
        for l in &labels {
            loss += pairwise_loss(&scores[offset..offset + l.len()], l, config.sigma);
            offset += l.len();
        }
        loss
    };

    let mut report = TrainReport { loss: vec![total_loss(&scores)], diagnostics };
    let mut trees = Vec::with_capacity(config.rounds);
    for _ in 0..config.rounds {
        let mut offset = 0;
        for l in &labels {
            let span = offset..offset + l.len();
            let (g, h) = compute_lambdas(&scores[span.clone()], l, config.sigma);
            grad[span.clone()].copy_from_slice(&g);
            hess[span].copy_from_slice(&h);
            offset += l.len();
        }
        let tree = fit_tree(&rows, &grad, &hess, config);
        for (s, x) in scores.iter_mut().zip(&rows) {
            *s += config.learning_rate * tree.output(x);
        }
        trees.push(tree);
        report.loss.push(total_loss(&scores));
    }
    Ok((RankerModel::new(config.clone(), fingerprint(&queries), trees), report))
}

pub fn predict(model: &RankerModel, documents: &[RankingDocument]) -> Result<Vec<f64>, LtrError> {
    documents
        .iter()
        .map(|d| {
            check_arity(&d.features)?;
            Ok(model.score(&d.features))
        })
        .collect()
}

/// Indices of `doc_ids` by descending score; equal scores in ascending
/// `doc_id` order.
pub fn rank<S: AsRef<str>>(doc_ids: &[S], scores: &[f64]) -> Vec<usize> {
    assert_eq!(doc_ids.len(), scores.len(), "one score per document");
    let mut order: Vec<usize> = (0..doc_ids.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].total_cmp(&scores[a]).then_with(|| doc_ids[a].as_ref().cmp(doc_ids[b].as_ref()))
    });
    order
}

/// Share of the total split gain contributed by each feature, largest first.
/// Features never split on are omitted.
pub fn feature_importance(model: &RankerModel) -> Result<Vec<(Feature, f64)>, LtrError> {
    let mut gain = [0.0f64; FEATURE_COUNT];
    for node in model.trees.iter().flat_map(|t| &t.nodes) {
        if let Node::Split { split_feature_index, gain: g, .. } = node {
            gain[*split_feature_index] += g;
        }
    }
    let total: f64 = gain.iter().sum();
    if total <= 0.0 {
        return Err(LtrError::NoSplits);
    }
    let mut shares: Vec<(Feature, f64)> = Feature::ALL
        .iter()
        .map(|f| (*f, gain[f.index()] / total))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    shares.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(shares)
}

pub fn serialize_model(model: &RankerModel) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(model).expect("model serializes");
    bytes.push(b'\n');
    bytes
}

pub fn deserialize_model(bytes: &[u8]) -> Result<RankerModel, LtrError> {
    let corrupt = |e: &dyn std::fmt::Display| LtrError::CorruptModel(e.to_string());
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| corrupt(&e))?;
    let schema = value.get("schema").and_then(serde_json::Value::as_u64);
    if schema != Some(MODEL_SCHEMA) {
        return Err(LtrError::SchemaVersionMismatch { found: schema });
    }
    let model: RankerModel = serde_json::from_value(value).map_err(|e| corrupt(&e))?;
    if model.feature_names != FEATURE_NAMES {
        return Err(corrupt(&"feature names differ from this build"));
    }
    if !model.base_score.is_finite() || !model.learning_rate.is_finite() {
        return Err(corrupt(&"non-finite base score or learning rate"));
    }
    for (i, t) in model.trees.iter().enumerate() {
        t.validate(FEATURE_COUNT).map_err(|e| corrupt(&format!("tree {i}: {e}")))?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, f0: f64, label: u8) -> RankingDocument {
        let mut features = vec![0.0; FEATURE_COUNT];
        features[0] = f0;
        RankingDocument { doc_id: id.into(), features, label }
    }

    /// Queries where the document with the smallest feature 0 is relevant.
    fn separable(n: usize) -> Vec<RankingQuery> {
        (0..n)
            .map(|q| RankingQuery {
                query_id: format!("q{q}"),
                documents: (0..5)
                    .map(|d| doc(&format!("d{d}"), ((q * 7 + d * 3) % 11) as f64 + d as f64 * 20.0, u8::from(d == 0)))
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn untrained_model_scores_base() {
        let m = RankerModel::new(TrainConfig::default(), String::new(), vec![]);
        assert_eq!(predict(&m, &[doc("a", 1.0, 0)]).unwrap(), vec![0.5]);
        let m = RankerModel::new(TrainConfig::default(), String::new(), vec![RegressionTree::leaf(2.0)]);
        assert_eq!(m.score(&[0.0; FEATURE_COUNT]), 0.5 + 0.3 * 2.0);
    }

    #[test]
    fn arity_is_checked() {
        let m = RankerModel::new(TrainConfig::default(), String::new(), vec![]);
        let bad = RankingDocument { doc_id: "x".into(), features: vec![0.0; 3], label: 0 };
        assert_eq!(predict(&m, &[bad]), Err(LtrError::FeatureArityMismatch { expected: 56, found: 3 }));
    }

    #[test]
    fn rank_orders_by_score_then_path() {
        let ids = ["b", "a", "c", "d", "e", "f"];
        assert_eq!(rank(&ids, &[0.27, 0.96, 0.42, 0.32, -0.24, 0.58]), vec![1, 5, 2, 3, 0, 4]);
        assert_eq!(rank(&["b", "c", "a"], &[1.0; 3]), vec![2, 0, 1]);
        assert_eq!(rank(&["only"], &[3.0]), vec![0]);
    }

    #[test]
    fn training_learns_a_separable_rule() {
        let qs = separable(30);
        let (model, report) = train_with_report(&qs, &TrainConfig { rounds: 20, ..Default::default() }).unwrap();
        for q in &qs {
            let s = predict(&model, &q.documents).unwrap();
            assert_eq!(rank(&q.documents.iter().map(|d| &d.doc_id).collect::<Vec<_>>(), &s)[0], 0);
        }
        assert!(report.loss.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", report.loss);
        let imp = feature_importance(&model).unwrap();
        assert_eq!(imp[0].0, Feature::Sloc);
        assert!((imp.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn training_errors() {
        assert_eq!(train(&[], &TrainConfig::default()), Err(LtrError::EmptyDataset));
        let all_neg = vec![RankingQuery { query_id: "q".into(), documents: vec![doc("a", 1.0, 0), doc("b", 2.0, 0)] }];
        assert_eq!(train(&all_neg, &TrainConfig::default()), Err(LtrError::EmptyDataset));
        assert!(matches!(
            train(&separable(2), &TrainConfig { rounds: 0, ..Default::default() }),
            Err(LtrError::InvalidConfig(_))
        ));
    }

    #[test]
    fn stump_models_have_no_importance() {
        let m = RankerModel::new(TrainConfig::default(), String::new(), vec![RegressionTree::leaf(1.0)]);
        assert_eq!(feature_importance(&m), Err(LtrError::NoSplits));
    }

    #[test]
    fn serialization_round_trip_and_errors() {
        let m = train(&separable(5), &TrainConfig { rounds: 3, seed: 7, ..Default::default() }).unwrap();
        let bytes = serialize_model(&m);
        assert_eq!(bytes, serialize_model(&train(&separable(5), &TrainConfig { rounds: 3, seed: 7, ..Default::default() }).unwrap()));
        assert_eq!(deserialize_model(&bytes).unwrap(), m);
        assert!(matches!(deserialize_model(&bytes[..bytes.len() / 2]), Err(LtrError::CorruptModel(_))));
        let text = String::from_utf8(bytes).unwrap().replacen("\"schema\": 1", "\"schema\": 2", 1);
        assert_eq!(
            deserialize_model(text.as_bytes()),
            Err(LtrError::SchemaVersionMismatch { found: Some(2) })
        );
        let renamed = String::from_utf8(serialize_model(&m)).unwrap().replacen("\"sloc\"", "\"lines\"", 1);
        assert!(matches!(deserialize_model(renamed.as_bytes()), Err(LtrError::CorruptModel(_))));
    }

    proptest! {
        #[test]
        fn rank_ignores_constant_shift(scores in prop::collection::vec(-100i32..100, 1..15), shift in -50i32..50) {
            let ids: Vec<String> = (0..scores.len()).map(|i| format!("f{i:02}")).collect();
            let base: Vec<f64> = scores.iter().map(|s| *s as f64 / 4.0).collect();
            let shifted: Vec<f64> = base.iter().map(|s| s + shift as f64).collect();
            prop_assert_eq!(rank(&ids, &base), rank(&ids, &shifted));
        }

        #[test]
        fn random_models_round_trip(weights in prop::collection::vec(-10.0f64..10.0, 0..5), thr in -5.0f64..5.0, feat in 0usize..56) {
            let trees = weights.iter().map(|w| RegressionTree {
                nodes: vec![
                    Node::Split { split_feature_index: feat, threshold: thr, default_branch: super::super::Branch::Left, left: 1, right: 2, gain: 1.0 },
                    Node::Leaf { weight: *w },
                    Node::Leaf { weight: -*w },
                ],
            }).collect();
            let m = RankerModel::new(TrainConfig::default(), "x".into(), trees);
            let back = deserialize_model(&serialize_model(&m)).unwrap();
            let x: Vec<f64> = (0..56).map(|i| i as f64 / 10.0 - 2.0).collect();
            prop_assert_eq!(back.score(&x), m.score(&x));
        }
    }
}
