//! Word-keyed embedding tables and the word2vec text format.
//!
//! The text format starts with a `<rows> <dims>` header line followed by
//! one `word v1 v2 ...` line per row. Values are written with the shortest
//! representation that parses back to the identical `f64`, so a
//! write/read cycle is lossless.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{cosine, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Matrix,
}

impl Embeddings {
    pub fn new(words: Vec<String>, matrix: Matrix) -> Result<Self> {
        if words.len() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: words.len(),
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!(
                    "embedding word {w:?} is empty or contains whitespace"
                )));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate embedding word {w:?}")));
            }
        }
        Ok(Embeddings {
            words,
            index,
            matrix,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        self.matrix.row(idx)
    }

    pub fn embedding(&self, word: &str) -> Option<&[f64]> {
        self.index(word).map(|i| self.row(i))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        &mut self.matrix
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.embedding(a)?, self.embedding(b)?))
    }

    pub fn read_word2vec_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header line"))??;
        let mut parts = header.split_whitespace();
        let mut header_field = |name: &str| -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::parse(1, format!("missing {name} in header")))?
                .parse()
                .map_err(|e| Error::parse(1, format!("bad {name} in header: {e}")))
        };
        let rows = header_field("vocabulary size")?;
        let dims = header_field("dimensionality")?;

        let mut words = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows * dims);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line has a token");
            let before = data.len();
            for part in parts {
                let v: f64 = part
                    .parse()
                    .map_err(|e| Error::parse(lineno, format!("bad component {part:?}: {e}")))?;
                data.push(v);
            }
            if data.len() - before != dims {
                return Err(Error::parse(
                    lineno,
                    format!("expected {dims} components, found {}", data.len() - before),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != rows {
            return Err(Error::parse(
                1,
                format!("header declares {rows} rows, file has {}", words.len()),
            ));
        }
        Embeddings::new(words, Matrix::from_vec(rows, dims, data)?)
    }

    pub fn write_word2vec_text<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim())?;
        for (i, word) in self.words.iter().enumerate() {
            write!(writer, "{word}")?;
            for v in self.row(i) {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_word2vec_text(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_word2vec_text(BufWriter::new(File::create(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_row_count_mismatch() {
        let text = "2 2\na 1 2\n";
        assert!(Embeddings::read_word2vec_text(text.as_bytes()).is_err());
        let text = "1 2\na 1\n";
        assert!(matches!(
            Embeddings::read_word2vec_text(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn parses_header_and_rows() {
        let text = "2 3\nfoo 1 0 0\nbar 0 1.5 -2\n";
        let e = Embeddings::read_word2vec_text(text.as_bytes()).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.dim(), 3);
        assert_eq!(e.embedding("bar").unwrap(), &[0.0, 1.5, -2.0]);
        assert_eq!(e.index("foo"), Some(0));
    }

    proptest! {
        #[test]
        fn text_format_is_lossless(values in prop::collection::vec(-1e6f64..1e6, 12)) {
            let words = vec!["a".into(), "b".into(), "c".into()];
            let e = Embeddings::new(words, Matrix::from_vec(3, 4, values).unwrap()).unwrap();
            let mut buf = Vec::new();
            e.write_word2vec_text(&mut buf).unwrap();
            let back = Embeddings::read_word2vec_text(&buf[..]).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
