//! Ranking quality: AP@K, MAP@K, improvement ratios and the baselines a
//! learned ranker is compared against.

mod baselines;
mod report;

pub use baselines::{guideline_rank, random_rank};
pub use report::{evaluate, EvalConfig, EvaluationReport, ImprovementRow, Strategy, StrategyRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("position {k} outside 1..={len}")]
    OutOfRange { k: usize, len: usize },
    #[error("no query results")]
    EmptyResults,
    #[error("baseline MAP is zero")]
    ZeroBaseline,
    #[error("no test query has a relevant document")]
    EmptyTestSet,
    #[error("strategy `learned` needs a model")]
    MissingModel,
    #[error(transparent)]
    Ltr(#[from] crate::ltr::LtrError),
}

/// What the AP@K normalizer `TR` counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrMode {
    /// Relevant documents among the top K.
    #[default]
    RetrievedInTopK,
    /// Every relevant document of the query.
    AllRelevant,
}

/// A ranking with the relevance of each position (1 = migrated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedQueryResult {
    pub query_id: String,
    pub order: Vec<String>,
    pub flags: Vec<u8>,
}

impl RankedQueryResult {
    pub fn new(query_id: impl Into<String>, order: Vec<String>, flags: Vec<u8>) -> Self {
        assert_eq!(order.len(), flags.len(), "one flag per ranked document");
        Self { query_id: query_id.into(), order, flags }
    }
}

fn check(flags: &[u8], k: usize) -> Result<(), EvalError> {
    if k == 0 || k > flags.len() {
        Err(EvalError::OutOfRange { k, len: flags.len() })
    } else {
        Ok(())
    }
}

/// Fraction of relevant documents among the first `n`.
pub fn precision_at(flags: &[u8], n: usize) -> Result<f64, EvalError> {
    check(flags, n)?;
    Ok(flags[..n].iter().filter(|f| **f != 0).count() as f64 / n as f64)
}

/// Relevance of the document at 1-based rank `k`.
pub fn rel_at(flags: &[u8], k: usize) -> Result<u8, EvalError> {
    check(flags, k)?;
    Ok(u8::from(flags[k - 1] != 0))
}

pub fn average_precision_at(flags: &[u8], k: usize) -> f64 {
    average_precision_at_with(flags, k, TrMode::RetrievedInTopK)
}

/// AP@K; `k` past the end of the list is truncated to its length.
pub fn average_precision_at_with(flags: &[u8], k: usize, mode: TrMode) -> f64 {
    let k = k.min(flags.len());
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (j, f) in flags[..k].iter().enumerate() {
        if *f != 0 {
            hits += 1;
            sum += hits as f64 / (j + 1) as f64;
        }
    }
    let tr = match mode {
        TrMode::RetrievedInTopK => hits,
        TrMode::AllRelevant => flags.iter().filter(|f| **f != 0).count(),
    };
    if tr == 0 {
        0.0
    } else {
        sum / tr as f64
    }
}

pub fn map_at(results: &[RankedQueryResult], k: usize) -> Result<f64, EvalError> {
    map_at_with(results, k, TrMode::RetrievedInTopK)
}

pub fn map_at_with(results: &[RankedQueryResult], k: usize, mode: TrMode) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let total: f64 = results.iter().map(|r| average_precision_at_with(&r.flags, k, mode)).sum();
    Ok(total / results.len() as f64)
}

/// Relative change of `ours` over `base`.
pub fn improvement(ours: f64, base: f64) -> Result<f64, EvalError> {
    if base <= 0.0 {
        return Err(EvalError::ZeroBaseline);
    }
    Ok((ours - base) / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precision_and_relevance() {
        assert_eq!(precision_at(&[1, 0, 0], 1), Ok(1.0));
        assert_eq!(precision_at(&[0, 1], 2), Ok(0.5));
        assert_eq!(precision_at(&[1, 1, 0, 1], 4), Ok(0.75));
        assert_eq!(precision_at(&[1], 2), Err(EvalError::OutOfRange { k: 2, len: 1 }));
        assert_eq!(precision_at(&[1], 0), Err(EvalError::OutOfRange { k: 0, len: 1 }));
        assert_eq!(rel_at(&[0, 1], 2), Ok(1));
        assert_eq!(rel_at(&[0, 1], 1), Ok(0));
        assert!(rel_at(&[0, 1], 3).is_err());
    }

    #[test]
    fn average_precision_examples() {
        assert_eq!(average_precision_at(&[1, 0, 0, 0, 0, 0], 1), 1.0);
        assert_eq!(average_precision_at(&[0, 1, 0], 3), 0.5);
        assert_eq!(average_precision_at(&[0, 0], 1), 0.0);
        assert_eq!(average_precision_at(&[0, 0], 5), 0.0);
        assert_eq!(average_precision_at(&[0, 1], 10), 0.5);
        // [1,0,1]: (1/1 + 2/3) / 2
        assert!((average_precision_at(&[1, 0, 1], 3) - 5.0 / 6.0).abs() < 1e-12);
        assert!((average_precision_at_with(&[1, 0, 1], 1, TrMode::AllRelevant) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mean_average_precision() {
        let r = |f: Vec<u8>| RankedQueryResult::new("q", (0..f.len()).map(|i| i.to_string()).collect(), f);
        assert_eq!(map_at(&[r(vec![1, 0]), r(vec![0, 0])], 1), Ok(0.5));
        assert_eq!(map_at(&[r(vec![1, 1, 0]), r(vec![1, 0])], 3), Ok(1.0));
        assert_eq!(map_at(&[], 3), Err(EvalError::EmptyResults));
    }

    #[test]
    fn improvement_ratios() {
        assert!((improvement(0.225, 0.188).unwrap() - 0.197).abs() < 5e-4);
        assert!((improvement(0.225, 0.108).unwrap() - 1.083).abs() < 5e-4);
        assert_eq!(improvement(0.3, 0.3), Ok(0.0));
        assert_eq!(improvement(0.3, 0.0), Err(EvalError::ZeroBaseline));
    }

    proptest! {
        #[test]
        fn ap_is_a_probability_and_prefix_rankings_score_one(
            flags in prop::collection::vec(0u8..2, 1..20),
            k in 1usize..25,
        ) {
            let ap = average_precision_at(&flags, k);
            prop_assert!((0.0..=1.0).contains(&ap));
            let top = &flags[..k.min(flags.len())];
            let hits = top.iter().filter(|f| **f == 1).count();
            let prefix = hits > 0 && top[..hits].iter().all(|f| *f == 1);
            prop_assert_eq!(ap == 1.0, prefix);
        }

        #[test]
        fn all_relevant_reading_is_monotone_in_k(flags in prop::collection::vec(0u8..2, 1..20)) {
            let aps: Vec<f64> = (1..=flags.len()).map(|k| average_precision_at_with(&flags, k, TrMode::AllRelevant)).collect();
            prop_assert!(aps.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
