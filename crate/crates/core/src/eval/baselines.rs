use crate::metrics::{classify_guideline_category, FeatureVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Data models, then tests, then utility classes, then everything else;
/// ties by ascending path.
pub fn guideline_rank<S: AsRef<str>>(doc_ids: &[S], features: &[FeatureVector]) -> Vec<usize> {
    assert_eq!(doc_ids.len(), features.len());
    let categories: Vec<_> = features.iter().map(classify_guideline_category).collect();
    let mut order: Vec<usize> = (0..doc_ids.len()).collect();
    order.sort_by(|&a, &b| categories[a].cmp(&categories[b]).then_with(|| doc_ids[a].as_ref().cmp(doc_ids[b].as_ref())));
    order
}

/// Uniformly random permutation of `0..n`, fixed by `seed`.
pub fn random_rank(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}
