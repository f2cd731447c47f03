//! Analogy questions `a : b :: c : ?` answered by a full vocabulary scan.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::datasets::AnalogyDataset;
use crate::embeddings::Embeddings;
use crate::linalg::{dot, norm, normalized};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalogyMethod {
    /// `argmax_x cos(x, b − a + c)`
    #[default]
    Add,
    /// `argmax_x cos′(x,b) cos′(x,c) / (cos′(x,a) + ε)` with `cos′ = (cos+1)/2`
    Mul,
}

const MUL_EPSILON: f64 = 1e-3;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AnalogyResult {
    pub correct: usize,
    pub covered: usize,
    pub total: usize,
    /// `(correct, covered)` per section header.
    pub sections: BTreeMap<String, (usize, usize)>,
}

impl AnalogyResult {
    /// Accuracy over the covered quads; 0 when nothing is covered.
    pub fn accuracy(&self) -> f64 {
        if self.covered == 0 {
            0.0
        } else {
            self.correct as f64 / self.covered as f64
        }
    }
}

/// Index of the best answer for `a : b :: c : ?`, excluding the three query
/// words. Ties go to the lower index. `None` if no candidate remains.
pub fn solve(emb: &Embeddings, a: usize, b: usize, c: usize, method: AnalogyMethod) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut consider = |x: usize, score: f64| {
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((x, score));
        }
    };
    let candidates = (0..emb.len()).filter(|&x| x != a && x != b && x != c);
    match method {
        AnalogyMethod::Add => {
            let target: Vec<f64> = emb
                .row(b)
                .iter()
                .zip(emb.row(a))
                .zip(emb.row(c))
                .map(|((vb, va), vc)| vb - va + vc)
                .collect();
            let tn = norm(&target);
            for x in candidates {
                let v = emb.row(x);
                let denom = norm(v) * tn;
                let score = if denom == 0.0 { 0.0 } else { dot(v, &target) / denom };
                consider(x, score);
            }
        }
        AnalogyMethod::Mul => {
            let (ua, ub, uc) = (normalized(emb.row(a)), normalized(emb.row(b)), normalized(emb.row(c)));
            for x in candidates {
                let ux = normalized(emb.row(x));
                let shift = |u: &[f64]| (dot(&ux, u) + 1.0) / 2.0;
                consider(x, shift(&ub) * shift(&uc) / (shift(&ua) + MUL_EPSILON));
            }
        }
    }
    best.map(|(x, _)| x)
}

/// Accuracy over quads whose four words are all in the vocabulary.
pub fn analogy(emb: &Embeddings, dataset: &AnalogyDataset, method: AnalogyMethod) -> AnalogyResult {
    let mut result = AnalogyResult {
        total: dataset.quads.len(),
        ..AnalogyResult::default()
    };
    for quad in &dataset.quads {
        let ids: Option<Vec<usize>> = quad.words.iter().map(|w| emb.index(w)).collect();
        let Some(ids) = ids else { continue };
        let hit = solve(emb, ids[0], ids[1], ids[2], method) == Some(ids[3]);
        result.covered += 1;
        result.correct += hit as usize;
        if let Some(section) = &quad.section {
            let entry = result.sections.entry(section.clone()).or_default();
            entry.0 += hit as usize;
            entry.1 += 1;
        }
    }
    result
}

pub fn analogy_3cosadd(emb: &Embeddings, dataset: &AnalogyDataset) -> AnalogyResult {
    analogy(emb, dataset, AnalogyMethod::Add)
}

pub fn analogy_3cosmul(emb: &Embeddings, dataset: &AnalogyDataset) -> AnalogyResult {
    analogy(emb, dataset, AnalogyMethod::Mul)
}
