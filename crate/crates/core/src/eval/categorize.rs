//! Concept categorization: k-means over L2-normalized vectors scored by
//! cluster purity.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::datasets::CategorizationDataset;
use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{normalized, squared_distance};

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategorizationResult {
    pub purity: f64,
    pub covered: usize,
    pub total: usize,
    pub k: usize,
    /// Covered words in dataset order, aligned with `assignment` and `labels`.
    pub words: Vec<String>,
    pub labels: Vec<usize>,
    pub assignment: Vec<usize>,
}

/// `(1/N) Σ_clusters max_label |cluster ∩ label|`
pub fn purity(assignment: &[usize], labels: &[usize]) -> f64 {
    if assignment.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&c, &l) in assignment.iter().zip(labels) {
        *counts.entry(c).or_default().entry(l).or_default() += 1;
    }
    let majority: usize = counts.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    majority as f64 / assignment.len() as f64
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// One Lloyd run from k-means++ seeds. Empty clusters keep their previous
/// center; nearest-center ties go to the lower cluster index.
pub fn kmeans_once<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Clustering {
    let dim = points[0].len();
    let mut centers = plus_plus_init(points, k, rng);
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            sizes[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for j in 0..k {
            if sizes[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / sizes[j] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| squared_distance(p, &centers[c]))
        .sum();
    Clustering { assignment, inertia }
}

/// Best of `restarts` runs by inertia; earlier runs win ties.
pub fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<Clustering> {
    if k == 0 || points.len() < k {
        return Err(Error::Coverage {
            covered: points.len(),
            required: k.max(1),
        });
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let run = kmeans_once(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

pub fn categorize_purity(
    emb: &Embeddings,
    dataset: &CategorizationDataset,
    seed: u64,
    restarts: usize,
) -> Result<CategorizationResult> {
    let categories = dataset.categories();
    let label_of: HashMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut words = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (w, c) in &dataset.items {
        if let Some(v) = emb.embedding(w) {
            words.push(w.clone());
            points.push(normalized(v));
            labels.push(label_of[c.as_str()]);
        }
    }
    let k = categories.len();
    if points.len() < k {
        return Err(Error::Coverage {
            covered: points.len(),
            required: k,
        });
    }
    let clustering = kmeans(&points, k, restarts, seed)?;
    Ok(CategorizationResult {
        purity: purity(&clustering.assignment, &labels),
        covered: points.len(),
        total: dataset.items.len(),
        k,
        words,
        labels,
        assignment: clustering.assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn dataset(labels: &[&str]) -> CategorizationDataset {
        CategorizationDataset::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("w{i}"), l.to_string()))
                .collect(),
        )
        .unwrap()
    }

    fn emb(rows: Vec<[f64; 2]>) -> Embeddings {
        Embeddings::new(
            (0..rows.len()).map(|i| format!("w{i}")).collect(),
            Matrix::from_vec(rows.len(), 2, rows.into_iter().flatten().collect()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn purity_counts() {
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 1, 1]), 1.0);
        assert_eq!(purity(&[0, 0, 0, 0], &[0, 1, 1, 1]), 0.75);
        assert_eq!(purity(&[0, 1, 0, 1], &[0, 0, 1, 1]), 0.5);
    }

    #[test]
    fn separated_clouds() {
        let e = emb(vec![[1.0, 0.01], [1.0, -0.02], [0.9, 0.0], [0.01, 1.0], [-0.02, 1.0], [0.0, 0.8]]);
        let ds = dataset(&["a", "a", "a", "b", "b", "b"]);
        let r = categorize_purity(&e, &ds, 3, DEFAULT_RESTARTS).unwrap();
        assert_eq!(r.purity, 1.0);
        assert_eq!((r.covered, r.total, r.k), (6, 6, 2));
    }

    #[test]
    fn identical_vectors_give_majority_fraction() {
        let e = emb(vec![[0.3, 0.4]; 5]);
        let ds = dataset(&["a", "b", "b", "b", "c"]);
        let r = categorize_purity(&e, &ds, 0, 4).unwrap();
        assert_eq!(r.purity, 3.0 / 5.0);
    }

    #[test]
    fn coverage_shortfall() {
        let e = emb(vec![[1.0, 0.0]]);
        let ds = dataset(&["a", "b", "c"]);
        assert!(matches!(categorize_purity(&e, &ds, 0, 1), Err(Error::Coverage { covered: 1, required: 3 })));
    }

    #[test]
    fn deterministic_under_seed() {
        let rows: Vec<[f64; 2]> = (0..12).map(|i| [(i as f64).cos(), (i as f64 * 0.7).sin()]).collect();
        let e = emb(rows);
        let ds = dataset(&["a", "b", "c", "a", "b", "c", "a", "b", "c", "a", "b", "c"]);
        let r1 = categorize_purity(&e, &ds, 42, 5).unwrap();
        let r2 = categorize_purity(&e, &ds, 42, 5).unwrap();
        assert_eq!(r1, r2);
    }
}
