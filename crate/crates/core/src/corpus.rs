//! Corpus ingestion: vocabulary construction, the unigram noise
//! distribution, and the (center, context window) example stream.
//!
//! Input is always pretokenized, one sentence per line with tokens separated
//! by whitespace. Nothing here splits or normalizes raw text.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};

/// Default exponent applied to unigram counts for the noise distribution.
pub const DEFAULT_NOISE_EXPONENT: f64 = 0.75;

/// Word/id mapping with occurrence counts and the negative-sampling table.
///
/// Ids are assigned by descending count, ties broken by first occurrence in
/// the corpus. The vocabulary is immutable once built.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
    total_tokens: u64,
    noise: NoiseTable,
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, count)` pairs already ordered by id.
    pub fn from_counts<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut ids = HashMap::new();
        for (word, count) in entries {
            let word = word.into();
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!(
                    "vocabulary word {word:?} is empty or contains whitespace"
                )));
            }
            if count == 0 {
                return Err(Error::InvalidParameter(format!(
                    "vocabulary word {word:?} has zero count"
                )));
            }
            if ids.insert(word.clone(), words.len() as u32).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate vocabulary word {word:?}"
                )));
            }
            words.push(word);
            counts.push(count);
        }
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let total_tokens = counts.iter().sum();
        let noise = NoiseTable::new(&counts, DEFAULT_NOISE_EXPONENT);
        Ok(Vocabulary {
            words,
            ids,
            counts,
            total_tokens,
            noise,
        })
    }

    /// Rebuilds the noise table with `P(w) ∝ count^exponent`.
    pub fn with_noise_exponent(mut self, exponent: f64) -> Self {
        self.noise = NoiseTable::new(&self.counts, exponent);
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Sum of counts over retained words.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn noise(&self) -> &NoiseTable {
        &self.noise
    }

    /// Maps a pretokenized line onto vocabulary ids, dropping unknown words.
    ///
    /// The returned sentence remembers where each kept token sat in the
    /// original line so that per-token teacher vectors stay aligned.
    pub fn tokenize(&self, line: &str) -> TokenizedSentence {
        let mut token_ids = Vec::new();
        let mut source_positions = Vec::new();
        let mut source_len = 0;
        for (pos, tok) in line.split_whitespace().enumerate() {
            source_len = pos + 1;
            if let Some(id) = self.id(tok) {
                token_ids.push(id);
                source_positions.push(pos);
            }
        }
        TokenizedSentence {
            token_ids,
            source_positions,
            source_len,
        }
    }

    /// Writes `word<TAB>count` lines in id order.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(writer, "{word}\t{count}")?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`Vocabulary::write`].
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(idx + 1, "expected word<TAB>count"))?;
            let count: u64 = count
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad count {count:?}: {e}")))?;
            entries.push((word.to_owned(), count));
        }
        Vocabulary::from_counts(entries)
    }

    /// Draws `k` ids i.i.d. from the noise distribution, rejecting ids in
    /// `exclude`.
    ///
    /// Requires the vocabulary to have more entries than `exclude`; otherwise
    /// the rejection loop could never terminate.
    pub fn sample_negative<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        k: usize,
        exclude: &[u32],
    ) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(k);
        self.sample_negative_into(rng, k, exclude, &mut out)?;
        Ok(out)
    }

    pub(crate) fn sample_negative_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        k: usize,
        exclude: &[u32],
        out: &mut Vec<u32>,
    ) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !self.can_sample_excluding(exclude) {
            return Err(Error::InvalidParameter(format!(
                "cannot sample negatives: all {} words are excluded",
                self.len()
            )));
        }
        out.clear();
        while out.len() < k {
            let id = self.noise.sample(rng);
            if !exclude.contains(&id) {
                out.push(id);
            }
        }
        Ok(())
    }

    /// Every id has positive mass, so sampling terminates iff some id is
    /// left outside `exclude`.
    pub(crate) fn can_sample_excluding(&self, exclude: &[u32]) -> bool {
        let mut excluded: Vec<u32> = exclude
            .iter()
            .copied()
            .filter(|&id| (id as usize) < self.len())
            .collect();
        excluded.sort_unstable();
        excluded.dedup();
        excluded.len() < self.len()
    }
}

/// Cumulative distribution over word ids for `P(w) ∝ count^exponent`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    cdf: Vec<f64>,
    exponent: f64,
}

impl NoiseTable {
    fn new(counts: &[u64], exponent: f64) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(exponent)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        NoiseTable { cdf, exponent }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn probability(&self, id: u32) -> f64 {
        let i = id as usize;
        let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        self.cdf[i] - prev
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u32
    }
}

/// Counts tokens over pretokenized lines and keeps words seen at least
/// `min_count` times, truncated to the `max_vocab` most frequent.
pub fn build_vocabulary<I, S>(lines: I, min_count: u64, max_vocab: Option<usize>) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count == 0 {
        return Err(Error::InvalidParameter("min_count must be at least 1".into()));
    }
    // (count, first occurrence) per word
    let mut stats: HashMap<String, (u64, usize)> = HashMap::new();
    let mut seen = 0usize;
    for line in lines {
        for tok in line.as_ref().split_whitespace() {
            match stats.get_mut(tok) {
                Some(entry) => entry.0 += 1,
                None => {
                    stats.insert(tok.to_owned(), (1, seen));
                    seen += 1;
                }
            }
        }
    }
    if stats.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut kept: Vec<(String, u64, usize)> = stats
        .into_iter()
        .filter(|(_, (c, _))| *c >= min_count)
        .map(|(w, (c, first))| (w, c, first))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    if let Some(max) = max_vocab {
        kept.truncate(max);
    }
    if kept.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no word occurs at least {min_count} times"
        )));
    }
    Vocabulary::from_counts(kept.into_iter().map(|(w, c, _)| (w, c)))
}

/// A corpus line mapped onto vocabulary ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedSentence {
    pub token_ids: Vec<u32>,
    /// Index of each kept token in the original line.
    pub source_positions: Vec<usize>,
    /// Token count of the original line, including dropped words.
    pub source_len: usize,
}

impl TokenizedSentence {
    /// A sentence with no dropped words.
    pub fn from_ids(token_ids: Vec<u32>) -> Self {
        let n = token_ids.len();
        TokenizedSentence {
            token_ids,
            source_positions: (0..n).collect(),
            source_len: n,
        }
    }

    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// One center position and its boundary-clipped context window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingExample {
    pub center: usize,
    window: Range<usize>,
}

impl TrainingExample {
    pub fn new(center: usize, sentence_len: usize, window_size: usize) -> Self {
        let start = center.saturating_sub(window_size);
        let end = (center + window_size + 1).min(sentence_len);
        TrainingExample {
            center,
            window: start..end,
        }
    }

    /// Context positions in ascending order, center excluded.
    pub fn context(&self) -> impl Iterator<Item = usize> + '_ {
        self.window.clone().filter(move |&p| p != self.center)
    }

    pub fn context_len(&self) -> usize {
        self.window.len() - 1
    }
}

/// One example per position of a sentence of length `len`. Sentences
/// shorter than two tokens yield nothing.
pub fn iter_examples(len: usize, window_size: usize) -> impl Iterator<Item = TrainingExample> {
    assert!(window_size >= 1, "window size must be at least 1");
    let n = if len < 2 { 0 } else { len };
    (0..n).map(move |center| TrainingExample::new(center, len, window_size))
}

/// Keeps lines whose token count lies in `[min_len, max_len]`.
pub fn length_filter(line: &str, min_len: usize, max_len: usize) -> bool {
    let n = line.split_whitespace().count();
    n >= min_len && n <= max_len
}

/// Frequent-word subsampling: probability of keeping a token with relative
/// frequency `freq` under threshold `t`.
pub fn keep_probability(freq: f64, t: f64) -> f64 {
    if freq <= 0.0 {
        1.0
    } else {
        ((t / freq).sqrt() + t / freq).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_drops_rare_words() {
        let v = build_vocabulary(["a a b", "a c"], 2, None).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.word(0), "a");
        assert_eq!(v.count(0), 3);
    }

    #[test]
    fn ties_break_by_first_occurrence() {
        let v = build_vocabulary(["x y", "y x"], 1, None).unwrap();
        assert_eq!(v.id("x"), Some(0));
        assert_eq!(v.id("y"), Some(1));
        assert_eq!(v.count(0), 2);
        assert_eq!(v.count(1), 2);
    }

    #[test]
    fn max_vocab_keeps_most_frequent() {
        let v = build_vocabulary(["c b b a a a d"], 1, Some(2)).unwrap();
        assert_eq!(v.words(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            build_vocabulary(Vec::<&str>::new(), 1, None),
            Err(Error::EmptyCorpus)
        ));
        assert!(matches!(build_vocabulary(["", "  "], 1, None), Err(Error::EmptyCorpus)));
        assert!(build_vocabulary(["a"], 0, None).is_err());
    }

    #[test]
    fn vocab_file_round_trips() {
        let v = build_vocabulary(["the cat sat on the mat", "the dog"], 1, None).unwrap();
        let mut buf = Vec::new();
        v.write(&mut buf).unwrap();
        let back = Vocabulary::read(&buf[..]).unwrap();
        assert_eq!(back.words(), v.words());
        let mut buf2 = Vec::new();
        back.write(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn noise_probabilities_sum_to_one() {
        let v = Vocabulary::from_counts([("a", 81u64), ("b", 16), ("c", 1)]).unwrap();
        let total: f64 = (0..3).map(|i| v.noise().probability(i)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // 81^0.75 = 27, 16^0.75 = 8, 1^0.75 = 1
        assert!((v.noise().probability(0) - 27.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn exclusion_forces_remaining_word() {
        let v = Vocabulary::from_counts([("a", 5u64), ("b", 5)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = v.sample_negative(&mut rng, 200, &[0]).unwrap();
        assert!(s.iter().all(|&id| id == 1));
        assert!(v.sample_negative(&mut rng, 3, &[0, 1]).is_err());
    }

    #[test]
    fn boundary_windows_are_clipped() {
        let ex: Vec<_> = iter_examples(3, 2).collect();
        assert_eq!(ex[0].context().collect::<Vec<_>>(), vec![1, 2]);
        let ex: Vec<_> = iter_examples(5, 1).collect();
        assert_eq!(ex[2].context().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(iter_examples(1, 3).count(), 0);
        assert_eq!(iter_examples(0, 3).count(), 0);
    }

    #[test]
    fn tokenize_tracks_source_positions() {
        let v = build_vocabulary(["a b a b", "c"], 2, None).unwrap();
        let s = v.tokenize("a c b x a");
        assert_eq!(s.token_ids, vec![0, 1, 0]);
        assert_eq!(s.source_positions, vec![0, 2, 4]);
        assert_eq!(s.source_len, 5);
    }

    #[test]
    fn length_filter_bounds_are_inclusive() {
        assert!(length_filter("a b c", 3, 3));
        assert!(!length_filter("a b", 3, 40));
    }

    proptest! {
        #[test]
        fn examples_stay_in_bounds(len in 0usize..60, window in 1usize..12) {
            let mut count = 0;
            for ex in iter_examples(len, window) {
                count += 1;
                prop_assert!(ex.center < len);
                let ctx: Vec<_> = ex.context().collect();
                prop_assert_eq!(ctx.len(), ex.context_len());
                prop_assert!(!ctx.is_empty() && ctx.len() <= 2 * window);
                for p in ctx {
                    prop_assert!(p < len);
                    prop_assert!(p != ex.center);
                    prop_assert!(p.abs_diff(ex.center) <= window);
                }
            }
            prop_assert_eq!(count, if len < 2 { 0 } else { len });
        }
    }
}
