//! Writes the planted-cluster fixture used by the CLI tests.
//!
//! ```text
//! cargo run -p ctx2vec --example make_fixture -- crates/cli/tests/fixtures
//! ```

use std::path::PathBuf;

use ctx2vec::synthetic::{PlantedConfig, PlantedCorpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    // lines shorter than 10 tokens exercise the prep length filter
    let corpus = PlantedCorpus::generate(&PlantedConfig {
        sentences: 300,
        min_len: 6,
        max_len: 20,
        ..PlantedConfig::default()
    })?;
    std::fs::write(dir.join("corpus.txt"), corpus.corpus_text())?;
    std::fs::write(dir.join("groups.tsv"), corpus.categorization_text())?;
    std::fs::write(dir.join("categorization.tsv"), corpus.categorization_text())?;
    std::fs::write(dir.join("lexicon.txt"), corpus.lexicon_text())?;
    std::fs::write(dir.join("similarity.tsv"), corpus.similarity_text())?;
    std::fs::write(dir.join("analogy.txt"), corpus.analogy_text())?;
    Ok(())
}
