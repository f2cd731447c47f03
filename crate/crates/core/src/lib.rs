//! Static word embeddings distilled from contextual "teacher" vectors.
//!
//! The crate is organised as a two-phase pipeline:
//!
//! 1. [`corpus`], [`teacher`] and [`trainer`] train a static embedding table
//!    with a skip-gram style objective whose center representation is a
//!    projected contextual vector. The joint objective combines a semantic
//!    term, a contextualized term driven by tied attention over the teacher
//!    vectors of the context words, and a negative-sampling term.
//! 2. [`retrofit`] post-processes any static embedding set over a synonym
//!    lexicon, weighting each edge with a Student-t kernel of the original
//!    Euclidean distance.
//!
//! [`eval`] provides the intrinsic evaluation harness (word similarity,
//! analogies, concept categorization and nearest neighbours).

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod retrofit;
pub mod synthetic;
pub mod teacher;
pub mod trainer;

pub use corpus::{iter_examples, TokenizedSentence, TrainingExample, Vocabulary};
pub use embeddings::Embeddings;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use retrofit::{RetrofitConfig, RetrofitMode, SynonymGraph};
pub use teacher::{ProjectionLayer, SyntheticTeacher, TeacherVectors};
pub use trainer::{AttentionLayer, AttentionMode, EmbeddingMatrix, TrainerConfig};
