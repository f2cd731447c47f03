use std::cmp::Ordering;

use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Top `n` words by cosine to `word`, excluding the query itself.
/// Equal cosines are ordered by ascending word id.
pub fn nearest_neighbors(emb: &Embeddings, word: &str, n: usize) -> Result<Vec<(String, f64)>> {
    let q = emb
        .index(word)
        .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
    let qv = emb.row(q);
    let qn = norm(qv);
    let mut scored: Vec<(usize, f64)> = (0..emb.len())
        .filter(|&i| i != q)
        .map(|i| {
            let v = emb.row(i);
            let denom = qn * norm(v);
            (i, if denom == 0.0 { 0.0 } else { dot(qv, v) / denom })
        })
        .collect();
    // numeric comparison so that -0.0 and 0.0 tie
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored.into_iter().map(|(i, s)| (emb.word(i).to_owned(), s)).collect())
}
