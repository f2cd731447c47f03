//! Intrinsic evaluation: word similarity, analogies, concept categorization
//! and nearest neighbours.
//!
//! Every metric is a pure function of an immutable [`Embeddings`] table and
//! reports how many dataset entries it could cover.
//!
//! [`Embeddings`]: crate::Embeddings

pub mod analogy;
pub mod categorize;
pub mod datasets;
pub mod neighbors;
pub mod similarity;

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub use analogy::{analogy, analogy_3cosadd, analogy_3cosmul, AnalogyMethod, AnalogyResult};
pub use categorize::{categorize_purity, kmeans, purity, CategorizationResult, Clustering};
pub use datasets::{AnalogyDataset, CategorizationDataset, ParseOptions, Quad, SimilarityDataset};
pub use neighbors::nearest_neighbors;
pub use similarity::{spearman, SimilarityResult};

/// One line of the machine-readable results file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalRecord {
    pub dataset: String,
    pub task: String,
    pub metric: String,
    pub score: f64,
    pub covered: usize,
    pub total: usize,
    /// How the score was produced, so results are self-describing.
    pub protocol: Value,
}

impl EvalRecord {
    pub fn similarity(dataset: &str, r: &SimilarityResult) -> Self {
        EvalRecord {
            dataset: dataset.to_owned(),
            task: "similarity".into(),
            metric: "spearman".into(),
            score: r.rho,
            covered: r.covered,
            total: r.total,
            protocol: serde_json::json!({ "similarity": "cosine", "ties": "average-rank" }),
        }
    }

    pub fn analogy(dataset: &str, method: AnalogyMethod, r: &AnalogyResult) -> Self {
        let name = match method {
            AnalogyMethod::Add => "3cosadd",
            AnalogyMethod::Mul => "3cosmul",
        };
        EvalRecord {
            dataset: dataset.to_owned(),
            task: "analogy".into(),
            metric: "accuracy".into(),
            score: r.accuracy(),
            covered: r.covered,
            total: r.total,
            protocol: serde_json::json!({
                "method": name,
                "exclude_query_words": true,
                "ties": "lower-id",
            }),
        }
    }

    pub fn categorization(dataset: &str, seed: u64, restarts: usize, r: &CategorizationResult) -> Self {
        EvalRecord {
            dataset: dataset.to_owned(),
            task: "categorization".into(),
            metric: "purity".into(),
            score: r.purity,
            covered: r.covered,
            total: r.total,
            protocol: serde_json::json!({
                "clusterer": "k-means",
                "init": "k-means++",
                "k": r.k,
                "restarts": restarts,
                "selection": "min-inertia",
                "vectors": "l2-normalized",
                "seed": seed,
            }),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

/// Fixed-width table of the records.
pub fn render_table(records: &[EvalRecord]) -> String {
    let width = records.iter().map(|r| r.dataset.len()).max().unwrap_or(0).max("dataset".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:<14}  {:<8}  {:>8}  coverage", "dataset", "task", "metric", "score");
    for r in records {
        let _ = writeln!(
            out,
            "{:<width$}  {:<14}  {:<8}  {:>8.4}  {}/{}",
            r.dataset, r.task, r.metric, r.score, r.covered, r.total
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_json_has_coverage() {
        let r = EvalRecord::similarity(
            "ws",
            &SimilarityResult {
                rho: 0.5,
                covered: 3,
                total: 4,
            },
        );
        let v: Value = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(v["dataset"], "ws");
        assert_eq!(v["covered"], 3);
        assert_eq!(v["total"], 4);
        assert_eq!(v["score"], 0.5);
    }

    #[test]
    fn table_lists_every_record() {
        let r = EvalRecord::analogy("google", AnalogyMethod::Add, &AnalogyResult::default());
        let t = render_table(&[r.clone(), r]);
        assert_eq!(t.lines().count(), 3);
        assert!(t.contains("0/0"));
    }
}
