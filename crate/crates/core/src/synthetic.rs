//! Planted-cluster fixtures: a corpus whose words fall into known groups,
//! together with the matching lexicon, categorization set and group map.
//!
//! Words are named `cNNwMM` (cluster `NN`, member `MM`). Every sentence has a
//! topic cluster; each token comes from that cluster with probability
//! `coherence` and uniformly from the whole vocabulary otherwise.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::CategorizationDataset;
use crate::retrofit::Lexicon;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedConfig {
    pub clusters: usize,
    pub words_per_cluster: usize,
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub coherence: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            clusters: 20,
            words_per_cluster: 5,
            sentences: 2000,
            min_len: 10,
            max_len: 20,
            coherence: 0.8,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedCorpus {
    pub lines: Vec<String>,
    /// Member words per cluster.
    pub clusters: Vec<Vec<String>>,
}

pub fn cluster_label(c: usize) -> String {
    format!("c{c:02}")
}

pub fn member_word(c: usize, m: usize) -> String {
    format!("c{c:02}w{m:02}")
}

impl PlantedCorpus {
    pub fn generate(config: &PlantedConfig) -> Result<Self> {
        if config.clusters < 2 || config.words_per_cluster == 0 {
            return Err(Error::InvalidParameter("need at least 2 non-empty clusters".into()));
        }
        if config.min_len == 0 || config.min_len > config.max_len {
            return Err(Error::InvalidParameter("need 0 < min_len <= max_len".into()));
        }
        if !(0.0..=1.0).contains(&config.coherence) {
            return Err(Error::InvalidParameter("coherence must lie in [0, 1]".into()));
        }
        let clusters: Vec<Vec<String>> = (0..config.clusters)
            .map(|c| (0..config.words_per_cluster).map(|m| member_word(c, m)).collect())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let lines = (0..config.sentences)
            .map(|_| {
                let topic = rng.random_range(0..config.clusters);
                let len = rng.random_range(config.min_len..=config.max_len);
                let words: Vec<&str> = (0..len)
                    .map(|_| {
                        let c = if rng.random_bool(config.coherence) {
                            topic
                        } else {
                            rng.random_range(0..config.clusters)
                        };
                        clusters[c][rng.random_range(0..config.words_per_cluster)].as_str()
                    })
                    .collect();
                words.join(" ")
            })
            .collect();
        Ok(PlantedCorpus { lines, clusters })
    }

    /// Word → cluster label, for keying teacher base vectors by group.
    pub fn groups(&self) -> HashMap<String, String> {
        self.items().into_iter().collect()
    }

    fn items(&self) -> Vec<(String, String)> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(c, ws)| ws.iter().map(move |w| (w.clone(), cluster_label(c))))
            .collect()
    }

    pub fn categorization(&self) -> CategorizationDataset {
        CategorizationDataset::new(self.items()).expect("planted clusters are valid")
    }

    /// One line per word listing the other members of its cluster.
    pub fn lexicon(&self) -> Lexicon {
        let entries = self
            .clusters
            .iter()
            .flat_map(|ws| {
                ws.iter().map(move |w| {
                    (w.clone(), ws.iter().filter(|o| *o != w).cloned().collect())
                })
            })
            .collect();
        Lexicon { entries }
    }

    pub fn corpus_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn lexicon_text(&self) -> String {
        let mut out = String::new();
        for (head, syns) in self.lexicon().entries {
            let _ = writeln!(out, "{head} {}", syns.join(" "));
        }
        out
    }

    /// `word<TAB>label` lines; also the group-map format.
    pub fn categorization_text(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.items() {
            let _ = writeln!(out, "{w}\t{c}");
        }
        out
    }

    /// Gold similarity pairs: 1 within a cluster, 0 across, over a
    /// deterministic sample of member pairs.
    pub fn similarity_text(&self) -> String {
        let mut out = String::new();
        let k = self.clusters.len();
        for c in 0..k {
            let ws = &self.clusters[c];
            if ws.len() >= 2 {
                let _ = writeln!(out, "{}\t{}\t1", ws[0], ws[1]);
            }
            let other = &self.clusters[(c + 1) % k];
            let _ = writeln!(out, "{}\t{}\t0", ws[0], other[other.len() - 1]);
        }
        out
    }

    /// Within-cluster "analogies" `a : b :: c : d` where `a`,`b` share a
    /// cluster and `c`,`d` share another.
    pub fn analogy_text(&self) -> String {
        let mut out = String::from(": planted\n");
        let k = self.clusters.len();
        for c in 0..k {
            let (x, y) = (&self.clusters[c], &self.clusters[(c + 1) % k]);
            if x.len() >= 2 && y.len() >= 2 {
                let _ = writeln!(out, "{} {} {} {}", x[0], x[1], y[0], y[1]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let config = PlantedConfig {
            sentences: 50,
            ..PlantedConfig::default()
        };
        let a = PlantedCorpus::generate(&config).unwrap();
        assert_eq!(a, PlantedCorpus::generate(&config).unwrap());
        assert_eq!(a.lines.len(), 50);
        assert_eq!(a.clusters.len(), 20);
        for l in &a.lines {
            let n = l.split_whitespace().count();
            assert!((10..=20).contains(&n));
        }
        assert_eq!(a.groups()["c03w01"], "c03");
        assert_eq!(a.categorization().categories().len(), 20);
        let lex = a.lexicon();
        assert_eq!(lex.entries.len(), 100);
        assert_eq!(lex.entries[0].1.len(), 4);
    }

    #[test]
    fn full_coherence_keeps_topic() {
        let config = PlantedConfig {
            sentences: 20,
            coherence: 1.0,
            ..PlantedConfig::default()
        };
        let corpus = PlantedCorpus::generate(&config).unwrap();
        for l in &corpus.lines {
            let prefixes: std::collections::HashSet<&str> = l.split_whitespace().map(|w| &w[..3]).collect();
            assert_eq!(prefixes.len(), 1);
        }
    }

    #[test]
    fn text_forms_parse_back() {
        use crate::eval::{AnalogyDataset, ParseOptions, SimilarityDataset};
        let corpus = PlantedCorpus::generate(&PlantedConfig {
            sentences: 5,
            ..PlantedConfig::default()
        })
        .unwrap();
        let o = ParseOptions::default();
        assert_eq!(
            CategorizationDataset::parse(corpus.categorization_text().as_bytes(), o).unwrap(),
            corpus.categorization()
        );
        assert_eq!(Lexicon::parse(corpus.lexicon_text().as_bytes()).unwrap(), corpus.lexicon());
        assert_eq!(SimilarityDataset::parse(corpus.similarity_text().as_bytes(), o).unwrap().pairs.len(), 40);
        assert_eq!(AnalogyDataset::parse(corpus.analogy_text().as_bytes(), o).unwrap().quads.len(), 20);
    }

    #[test]
    fn rejects_bad_config() {
        for config in [
            PlantedConfig { clusters: 1, ..PlantedConfig::default() },
            PlantedConfig { min_len: 5, max_len: 4, ..PlantedConfig::default() },
            PlantedConfig { coherence: 1.5, ..PlantedConfig::default() },
        ] {
            assert!(PlantedCorpus::generate(&config).is_err());
        }
    }
}
