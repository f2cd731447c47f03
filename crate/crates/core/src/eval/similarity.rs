use serde::Serialize;

use super::datasets::SimilarityDataset;
use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::cosine;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimilarityResult {
    pub rho: f64,
    pub covered: usize,
    pub total: usize,
}

/// 1-based ranks, ties receiving the average of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; 0 when either side has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Spearman correlation between cosine similarity and the gold scores over
/// the pairs whose two words are both in the vocabulary.
pub fn spearman(emb: &Embeddings, dataset: &SimilarityDataset) -> Result<SimilarityResult> {
    let mut model = Vec::new();
    let mut gold = Vec::new();
    for (a, b, score) in &dataset.pairs {
        if let (Some(va), Some(vb)) = (emb.embedding(a), emb.embedding(b)) {
            model.push(cosine(va, vb));
            gold.push(*score);
        }
    }
    if model.len() < 2 {
        return Err(Error::Coverage {
            covered: model.len(),
            required: 2,
        });
    }
    Ok(SimilarityResult {
        rho: spearman_rho(&model, &gold),
        covered: model.len(),
        total: dataset.pairs.len(),
    })
}
