use super::{average_precision_at_with, guideline_rank, improvement, random_rank, EvalError, TrMode};
use crate::ltr::{check_arity, predict, rank, LtrError, RankerModel, RankingQuery};
use crate::metrics::FeatureVector;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Guideline,
    Learned,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Guideline => "guideline",
            Strategy::Learned => "learned",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Strategy::Random),
            "guideline" => Ok(Strategy::Guideline),
            "learned" => Ok(Strategy::Learned),
            other => Err(format!("unknown strategy `{other}` (expected random, guideline or learned)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k_max: usize,
    /// Number of shuffles the random baseline is averaged over.
    pub trials: usize,
    pub seed: u64,
    pub tr_mode: TrMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { k_max: 10, trials: 30, seed: 0, tr_mode: TrMode::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: Strategy,
    /// MAP@1..=k_max.
    pub map: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub baseline: Strategy,
    /// Relative improvement of the learned ranker per k; `None` where the
    /// baseline MAP is zero.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub k_max: usize,
    pub tr_mode: TrMode,
    pub query_count: usize,
    pub skipped_queries: usize,
    pub random_seeds: Vec<u64>,
    pub strategies: Vec<StrategyRow>,
    pub improvements: Vec<ImprovementRow>,
    pub diagnostics: Vec<String>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of the shuffle for query `query_idx` in random trial `trial_seed`.
fn query_seed(trial_seed: u64, query_idx: usize) -> u64 {
    trial_seed.wrapping_mul(GOLDEN).wrapping_add(query_idx as u64)
}

fn flags_in_order(q: &RankingQuery, order: &[usize]) -> Vec<u8> {
    order.iter().map(|&i| q.documents[i].label).collect()
}

fn map_curve(rankings: &[Vec<u8>], k_max: usize, mode: TrMode) -> Vec<f64> {
    (1..=k_max)
        .map(|k| rankings.iter().map(|f| average_precision_at_with(f, k, mode)).sum::<f64>() / rankings.len() as f64)
        .collect()
}

/// MAP@1..=k_max of each strategy over the test queries, plus the learned
/// ranker's improvement over every baseline that was evaluated.
pub fn evaluate(
    queries: &[RankingQuery],
    strategies: &[Strategy],
    model: Option<&RankerModel>,
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    let mut diagnostics = Vec::new();
    let usable: Vec<&RankingQuery> = queries
        .iter()
        .filter(|q| {
            let keep = q.positives() > 0;
            if !keep {
                diagnostics.push(format!("query {} skipped: no relevant document", q.query_id));
            }
            keep
        })
        .collect();
    if usable.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut strategies = strategies.to_vec();
    strategies.sort_unstable();
    strategies.dedup();

    let random_seeds: Vec<u64> = if strategies.contains(&Strategy::Random) {
        (0..config.trials as u64).map(|t| config.seed.wrapping_add(t)).collect()
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for &strategy in &strategies {
        let map = match strategy {
            Strategy::Random => {
                let mut sum = vec![0.0; config.k_max];
                for &seed in &random_seeds {
                    let rankings: Vec<Vec<u8>> = usable
                        .iter()
                        .enumerate()
                        .map(|(qi, q)| flags_in_order(q, &random_rank(q.documents.len(), query_seed(seed, qi))))
                        .collect();
                    for (s, v) in sum.iter_mut().zip(map_curve(&rankings, config.k_max, config.tr_mode)) {
                        *s += v;
                    }
                }
                sum.iter().map(|s| s / random_seeds.len().max(1) as f64).collect()
            }
            Strategy::Guideline => {
                let rankings: Vec<Vec<u8>> = usable
                    .iter()
                    .map(|q| {
                        let ids: Vec<&str> = q.documents.iter().map(|d| d.doc_id.as_str()).collect();
                        let feats = q
                            .documents
                            .iter()
                            .map(|d| {
                                check_arity(&d.features)?;
                                Ok(FeatureVector::from_slice(&d.features).expect("arity checked"))
                            })
                            .collect::<Result<Vec<_>, LtrError>>()?;
                        Ok(flags_in_order(q, &guideline_rank(&ids, &feats)))
                    })
                    .collect::<Result<_, EvalError>>()?;
                map_curve(&rankings, config.k_max, config.tr_mode)
            }
            Strategy::Learned => {
                let model = model.ok_or(EvalError::MissingModel)?;
                let rankings: Vec<Vec<u8>> = usable
                    .iter()
                    .map(|q| {
                        let scores = predict(model, &q.documents)?;
                        let ids: Vec<&str> = q.documents.iter().map(|d| d.doc_id.as_str()).collect();
                        Ok(flags_in_order(q, &rank(&ids, &scores)))
                    })
                    .collect::<Result<_, EvalError>>()?;
                map_curve(&rankings, config.k_max, config.tr_mode)
            }
        };
        rows.push(StrategyRow { strategy, map });
    }

    let mut improvements = Vec::new();
    if let Some(learned) = rows.iter().find(|r| r.strategy == Strategy::Learned) {
        for base in rows.iter().filter(|r| r.strategy != Strategy::Learned) {
            let values = learned.map.iter().zip(&base.map).map(|(o, b)| improvement(*o, *b).ok()).collect();
            improvements.push(ImprovementRow { baseline: base.strategy, values });
        }
    }

    Ok(EvaluationReport {
        k_max: config.k_max,
        tr_mode: config.tr_mode,
        query_count: usable.len(),
        skipped_queries: queries.len() - usable.len(),
        random_seeds,
        strategies: rows,
        improvements,
        diagnostics,
    })
}

impl EvaluationReport {
    pub fn map(&self, strategy: Strategy) -> Option<&[f64]> {
        self.strategies.iter().find(|r| r.strategy == strategy).map(|r| r.map.as_slice())
    }

    /// One row per strategy and per improvement, one column per k.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for k in 1..=self.k_max {
            write!(out, ",k{k}").unwrap();
        }
        out.push('\n');
        for r in &self.strategies {
            out.push_str(r.strategy.name());
            for v in &r.map {
                write!(out, ",{v:.4}").unwrap();
            }
            out.push('\n');
        }
        for r in &self.improvements {
            write!(out, "improvement_vs_{}", r.baseline.name()).unwrap();
            for v in &r.values {
                match v {
                    Some(v) => write!(out, ",{v:.4}").unwrap(),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable table with improvements in percent.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<26}", "MAP@K");
        for k in 1..=self.k_max {
            write!(out, "{:>8}", format!("K={k}")).unwrap();
        }
        out.push('\n');
        for r in &self.strategies {
            write!(out, "{:<26}", r.strategy.name()).unwrap();
            for v in &r.map {
                write!(out, "{v:>8.3}").unwrap();
            }
            out.push('\n');
        }
        for r in &self.improvements {
            write!(out, "{:<26}", format!("improvement vs {} (%)", r.baseline.name())).unwrap();
            for v in &r.values {
                match v {
                    Some(v) => write!(out, "{:>8.1}", v * 100.0).unwrap(),
                    None => write!(out, "{:>8}", "n/a").unwrap(),
                }
            }
            out.push('\n');
        }
        writeln!(out, "queries: {} (skipped without relevant files: {})", self.query_count, self.skipped_queries).unwrap();
        out
    }
}
