//! Parsers for the three intrinsic evaluation formats.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    pub lowercase: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { lowercase: true }
    }
}

impl ParseOptions {
    fn word(&self, w: &str) -> String {
        if self.lowercase {
            w.to_lowercase()
        } else {
            w.to_owned()
        }
    }
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| match r {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

/// `word_a<TAB>word_b<TAB>score`
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    pub fn new(pairs: Vec<(String, String, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, (a, b, s)) in pairs.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidParameter(format!("pair {i} has non-finite score")));
            }
            if !seen.insert((a.as_str(), b.as_str())) {
                return Err(Error::InvalidParameter(format!("duplicate pair ({a}, {b})")));
            }
        }
        Ok(SimilarityDataset { pairs })
    }

    pub fn parse<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut seen = HashSet::new();
        for line in content_lines(reader) {
            let (n, line) = line?;
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(n, format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let score: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(n, format!("bad score {:?}", fields[2])))?;
            if !score.is_finite() {
                return Err(Error::parse(n, "score is not finite"));
            }
            let (a, b) = (opts.word(fields[0]), opts.word(fields[1]));
            if !seen.insert((a.clone(), b.clone())) {
                return Err(Error::parse(n, format!("duplicate pair ({a}, {b})")));
            }
            pairs.push((a, b, score));
        }
        Ok(SimilarityDataset { pairs })
    }

    pub fn load(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?), opts)
    }
}

/// One `a : b :: c : d` question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub words: [String; 4],
    pub section: Option<String>,
}

/// Google questions-words format.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogyDataset {
    pub quads: Vec<Quad>,
}

impl AnalogyDataset {
    pub fn parse<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Self> {
        let mut quads = Vec::new();
        let mut section = None;
        for line in content_lines(reader) {
            let (n, line) = line?;
            let line = line.trim();
            if let Some(name) = line.strip_prefix(':') {
                section = Some(name.trim().to_owned());
                continue;
            }
            let words: Vec<String> = line.split_whitespace().map(|w| opts.word(w)).collect();
            let words: [String; 4] = words
                .try_into()
                .map_err(|w: Vec<String>| Error::parse(n, format!("expected 4 words, got {}", w.len())))?;
            let distinct: HashSet<&String> = words.iter().collect();
            if distinct.len() != 4 {
                return Err(Error::parse(n, "analogy words must be distinct"));
            }
            quads.push(Quad {
                words,
                section: section.clone(),
            });
        }
        Ok(AnalogyDataset { quads })
    }

    pub fn load(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?), opts)
    }
}

/// `word<TAB>category`
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CategorizationDataset {
    pub items: Vec<(String, String)>,
}

impl CategorizationDataset {
    pub fn new(items: Vec<(String, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (w, _) in &items {
            if !seen.insert(w.as_str()) {
                return Err(Error::InvalidParameter(format!("word {w} listed twice")));
            }
        }
        let ds = CategorizationDataset { items };
        if ds.categories().len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 categories".into()));
        }
        Ok(ds)
    }

    pub fn parse<R: BufRead>(reader: R, opts: ParseOptions) -> Result<Self> {
        let mut items = Vec::new();
        let mut seen = HashSet::new();
        let mut last = 0;
        for line in content_lines(reader) {
            let (n, line) = line?;
            last = n;
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::parse(n, "expected word<TAB>category"));
            }
            let word = opts.word(fields[0]);
            if !seen.insert(word.clone()) {
                return Err(Error::parse(n, format!("word {word} listed twice")));
            }
            items.push((word, fields[1].to_owned()));
        }
        let ds = CategorizationDataset { items };
        if ds.categories().len() < 2 {
            return Err(Error::parse(last, "need at least 2 categories"));
        }
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>, opts: ParseOptions) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?), opts)
    }

    /// Distinct labels in first-seen order.
    pub fn categories(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.items
            .iter()
            .filter(|(_, c)| seen.insert(c.as_str()))
            .map(|(_, c)| c.as_str())
            .collect()
    }
}
