//! Second-order regression trees with exact greedy split search.

use super::TrainConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    /// Rows with `x[split_feature_index] < threshold` go left.
    Split {
        split_feature_index: usize,
        threshold: f64,
        /// Branch taken by a missing (NaN) value.
        default_branch: Branch,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    /// Node 0 is the root; children always follow their parent.
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(weight: f64) -> Self {
        Self { nodes: vec![Node::Leaf { weight }] }
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split { split_feature_index, threshold, default_branch, left, right, .. } => {
                    let v = x[*split_feature_index];
                    let go_left = if v.is_nan() { *default_branch == Branch::Left } else { v < *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural checks for trees read from disk.
    pub fn validate(&self, feature_count: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree without nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { weight } if !weight.is_finite() => return Err(format!("node {i}: non-finite weight")),
                Node::Leaf { .. } => {}
                Node::Split { split_feature_index, threshold, left, right, .. } => {
                    if *split_feature_index >= feature_count {
                        return Err(format!("node {i}: feature index {split_feature_index} out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return Err(format!("node {i}: bad child {c}"));
                        }
                        parents[c] += 1;
                    }
                }
            }
        }
        if parents.iter().skip(1).any(|&p| p != 1) || parents[0] != 0 {
            return Err("nodes do not form a tree".into());
        }
        Ok(())
    }
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let w = -g / (h + lambda);
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Fits one tree to per-row gradients and hessians.
///
/// Nodes are grown level by level. For every open node the best split over
/// all features is the one with the largest gain; ties keep the lowest
/// feature index and then the lowest threshold.
pub fn fit_tree(rows: &[&[f64]], grad: &[f64], hess: &[f64], config: &TrainConfig) -> RegressionTree {
    assert_eq!(rows.len(), grad.len());
    assert_eq!(rows.len(), hess.len());
    let lambda = config.reg_lambda;
    let n_features = rows.first().map_or(0, |r| r.len());

    let sorted: Vec<Vec<usize>> = (0..n_features)
        .map(|f| {
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
            idx
        })
        .collect();

    // Per row: index of the open node that owns it, if any.
    let mut owner: Vec<Option<usize>> = vec![Some(0); rows.len()];
    let mut nodes: Vec<Node> = vec![Node::Leaf { weight: 0.0 }];
    let mut open = vec![0usize];
    let mut totals = vec![(0.0, 0.0)];
    for i in 0..rows.len() {
        totals[0].0 += grad[i];
        totals[0].1 += hess[i];
    }

    for depth in 0..=config.max_depth {
        let mut slot = vec![usize::MAX; nodes.len()];
        for (k, &node) in open.iter().enumerate() {
            slot[node] = k;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
        if depth < config.max_depth {
            for (f, order) in sorted.iter().enumerate() {
                let mut gl = vec![0.0; open.len()];
                let mut hl = vec![0.0; open.len()];
                let mut last: Vec<Option<f64>> = vec![None; open.len()];
                for &r in order {
                    let Some(node) = owner[r] else { continue };
                    let k = slot[node];
                    let v = rows[r][f];
                    if let Some(prev) = last[k].filter(|p| *p < v) {
                        let (g, h) = totals[node];
                        let (gr, hr) = (g - gl[k], h - hl[k]);
                        if hl[k] >= config.min_child_weight && hr >= config.min_child_weight {
                            let gain = 0.5 * (score(gl[k], hl[k], lambda) + score(gr, hr, lambda) - score(g, h, lambda));
                            if gain > 0.0 && best[k].is_none_or(|b| gain > b.gain) {
                                let mut threshold = prev + (v - prev) / 2.0;
                                if threshold <= prev {
                                    threshold = v;
                                }
                                best[k] = Some(Candidate { gain, feature: f, threshold });
                            }
                        }
                    }
                    gl[k] += grad[r];
                    hl[k] += hess[r];
                    last[k] = Some(v);
                }
            }
        }

        let mut next_open = Vec::new();
        let mut children = vec![None; open.len()];
        for (k, &node) in open.iter().enumerate() {
            let (g, h) = totals[node];
            match best[k] {
                Some(c) => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes[node] = Node::Split {
                        split_feature_index: c.feature,
                        threshold: c.threshold,
                        default_branch: Branch::Left,
                        left,
                        right: left + 1,
                        gain: c.gain,
                    };
                    children[k] = Some((left, c));
                    next_open.extend([left, left + 1]);
                }
                None => nodes[node] = Node::Leaf { weight: leaf_weight(g, h, lambda) },
            }
        }
        if next_open.is_empty() {
            break;
        }

        let mut new_totals = vec![(0.0, 0.0); nodes.len()];
        for r in 0..rows.len() {
            let Some(node) = owner[r] else { continue };
            owner[r] = match children[slot[node]] {
                Some((left, c)) => {
                    let child = if rows[r][c.feature] < c.threshold { left } else { left + 1 };
                    new_totals[child].0 += grad[r];
                    new_totals[child].1 += hess[r];
                    Some(child)
                }
                None => None,
            };
        }
        totals = new_totals;
        open = next_open;
    }
    RegressionTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> TrainConfig {
        TrainConfig { min_child_weight: 0.0, ..TrainConfig::default() }
    }

    fn fit(rows: &[Vec<f64>], g: &[f64], h: &[f64], config: &TrainConfig) -> RegressionTree {
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        fit_tree(&refs, g, h, config)
    }

    #[test]
    fn constant_features_give_a_single_leaf() {
        let rows = vec![vec![1.0, 2.0]; 4];
        let t = fit(&rows, &[1.0, 2.0, -0.5, 0.5], &[1.0; 4], &cfg());
        assert_eq!(t, RegressionTree::leaf(-3.0 / 5.0));
    }

    #[test]
    fn zero_gradients_give_a_zero_leaf() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let t = fit(&rows, &[0.0; 5], &[1.0; 5], &cfg());
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.output(&[3.0]), 0.0);
    }

    #[test]
    fn separating_feature_is_chosen() {
        // feature 1 carries the sign of the gradient; feature 0 is noise
        let rows = vec![vec![0.3, -2.0], vec![0.1, -1.0], vec![0.2, 1.0], vec![0.4, 3.0]];
        let g = [1.0, 1.0, -1.0, -1.0];
        let t = fit(&rows, &g, &[1.0; 4], &TrainConfig { max_depth: 1, ..cfg() });
        match &t.nodes[0] {
            Node::Split { split_feature_index, threshold, .. } => {
                assert_eq!(*split_feature_index, 1);
                assert_eq!(*threshold, 0.0);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.depth(), 1);
        assert!(t.output(&[0.0, -5.0]) < 0.0 && t.output(&[0.0, 5.0]) > 0.0);
    }

    #[test]
    fn min_child_weight_blocks_small_children() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let g = [5.0, -1.0, -1.0, -1.0];
        let blocked = fit(&rows, &g, &[0.5; 4], &TrainConfig { min_child_weight: 0.6, max_depth: 1, ..cfg() });
        match &blocked.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected split, got {other:?}"),
        }
        let none = fit(&rows, &g, &[0.5; 4], &TrainConfig { min_child_weight: 1.5, ..cfg() });
        assert_eq!(none.nodes.len(), 1);
    }

    #[test]
    fn adjacent_floats_get_the_upper_value_as_threshold() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = fit(&[vec![a], vec![b]], &[1.0, -1.0], &[1.0, 1.0], &cfg());
        assert!(t.output(&[a]) < 0.0 && t.output(&[b]) > 0.0);
    }

    #[test]
    fn validate_rejects_bad_structure() {
        let mut t = fit(&[vec![0.0], vec![1.0]], &[1.0, -1.0], &[1.0, 1.0], &cfg());
        assert!(t.validate(1).is_ok());
        assert!(t.validate(0).is_err());
        if let Node::Split { left, .. } = &mut t.nodes[0] {
            *left = 0;
        }
        assert!(t.validate(1).is_err());
    }

    proptest! {
        #[test]
        fn splits_have_positive_gain_and_respect_depth(
            data in prop::collection::vec((prop::collection::vec(-3i32..3, 3), -2.0f64..2.0, 0.01f64..1.0), 1..40),
            max_depth in 1usize..5,
            mcw in 0.0f64..1.0,
        ) {
            let rows: Vec<Vec<f64>> = data.iter().map(|(x, _, _)| x.iter().map(|v| *v as f64).collect()).collect();
            let g: Vec<f64> = data.iter().map(|d| d.1).collect();
            let h: Vec<f64> = data.iter().map(|d| d.2).collect();
            let t = fit(&rows, &g, &h, &TrainConfig { max_depth, min_child_weight: mcw, ..TrainConfig::default() });
            prop_assert!(t.validate(3).is_ok());
            prop_assert!(t.depth() <= max_depth);
            for n in &t.nodes {
                if let Node::Split { gain, .. } = n {
                    prop_assert!(*gain > 0.0);
                }
            }
        }
    }
}
