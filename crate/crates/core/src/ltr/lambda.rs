//! ΔNDCG-weighted pairwise gradients.

use std::cmp::Ordering;

fn gain(label: u8) -> f64 {
    (1u64 << label) as f64 - 1.0
}

/// Discount of a 0-based rank position.
fn discount(position: usize) -> f64 {
    1.0 / ((position + 2) as f64).log2()
}

fn ideal_dcg(labels: &[u8]) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.iter().enumerate().map(|(p, &l)| gain(l) * discount(p)).sum()
}

/// 0-based rank position of every document when ordered by descending
/// score; equal scores keep input order.
fn positions(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut pos = vec![0; scores.len()];
    for (p, &doc) in order.iter().enumerate() {
        pos[doc] = p;
    }
    pos
}

fn delta(labels: &[u8], pos: &[usize], idcg: f64, i: usize, j: usize) -> f64 {
    if labels[i] == labels[j] || idcg == 0.0 {
        return 0.0;
    }
    let dg = gain(labels[i]) - gain(labels[j]);
    let dd = discount(pos[i]) - discount(pos[j]);
    (dg * dd).abs() / idcg
}

/// |NDCG change| when documents `i` and `j` swap places in the ranking
/// implied by `scores`.
pub fn delta_ndcg(labels: &[u8], scores: &[f64], i: usize, j: usize) -> f64 {
    assert_eq!(labels.len(), scores.len());
    assert_ne!(i, j);
    delta(labels, &positions(scores), ideal_dcg(labels), i, j)
}

/// Gradient of the ΔNDCG-weighted pairwise logistic loss with respect to
/// each score, and the matching diagonal Hessian.
pub fn compute_lambdas(scores: &[f64], labels: &[u8], sigma: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(labels.len(), scores.len());
    let n = scores.len();
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let pos = positions(scores);
    let idcg = ideal_dcg(labels);
    for i in 0..n {
        for j in 0..n {
            if labels[i] <= labels[j] {
                continue;
            }
            let dn = delta(labels, &pos, idcg, i, j);
            let rho = 1.0 / (1.0 + (sigma * (scores[i] - scores[j])).exp());
            let lambda = sigma * rho * dn;
            grad[i] -= lambda;
            grad[j] += lambda;
            let h = sigma * sigma * rho * (1.0 - rho) * dn;
            hess[i] += h;
            hess[j] += h;
        }
    }
    (grad, hess)
}

/// Σ over pairs with `label_i > label_j` of `log(1 + exp(−σ(s_i − s_j)))·ΔNDCG_ij`,
/// with ΔNDCG taken from the ranking implied by `scores`.
pub fn pairwise_loss(scores: &[f64], labels: &[u8], sigma: f64) -> f64 {
    let pos = positions(scores);
    let idcg = ideal_dcg(labels);
    let mut loss = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] > labels[j] {
                let z = -sigma * (scores[i] - scores[j]);
                // log1p(exp(z)) without overflow
                let l = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                loss += l * delta(labels, &pos, idcg, i, j);
            }
        }
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_document_swap() {
        // relevant document ranked second
        let d = delta_ndcg(&[1, 0], &[0.0, 1.0], 0, 1);
        assert!((d - (1.0 - 1.0 / 3f64.log2())).abs() < 1e-12);
        assert!((d - 0.3691).abs() < 1e-4);
        assert_eq!(delta_ndcg(&[1, 1], &[0.0, 1.0], 0, 1), 0.0);
    }

    #[test]
    fn symmetric_point() {
        let d = delta_ndcg(&[1, 0], &[0.0, 0.0], 0, 1);
        let (g, h) = compute_lambdas(&[0.0, 0.0], &[1, 0], 2.0);
        assert!((g[0] + 0.5 * 2.0 * d).abs() < 1e-12);
        assert!((g[1] - 0.5 * 2.0 * d).abs() < 1e-12);
        assert!((h[0] - 4.0 * 0.25 * d).abs() < 1e-12);
    }

    #[test]
    fn equal_labels_have_no_gradient() {
        let (g, h) = compute_lambdas(&[0.3, -1.0, 2.0], &[0, 0, 0], 1.0);
        assert!(g.iter().chain(&h).all(|v| *v == 0.0));
        let (g, h) = compute_lambdas(&[0.3], &[1], 1.0);
        assert_eq!((g, h), (vec![0.0], vec![0.0]));
    }

    proptest! {
        #[test]
        fn lambdas_sum_to_zero(
            docs in prop::collection::vec((-5.0f64..5.0, 0u8..2), 1..12),
            sigma in 0.1f64..3.0,
        ) {
            let (scores, labels): (Vec<_>, Vec<_>) = docs.into_iter().unzip();
            let (g, h) = compute_lambdas(&scores, &labels, sigma);
            prop_assert!(g.iter().sum::<f64>().abs() < 1e-9);
            prop_assert!(h.iter().all(|v| *v >= 0.0));
        }

        #[test]
        fn isolated_pair_is_antisymmetric(si in -5.0f64..5.0, sj in -5.0f64..5.0, sigma in 0.1f64..3.0) {
            let (g, _) = compute_lambdas(&[si, sj], &[1, 0], sigma);
            prop_assert_eq!(g[0], -g[1]);
            prop_assert!(g[0] <= 0.0);
        }
    }
}
