//! Teacher vectors: one frozen contextual vector per corpus token, plus the
//! trainable projection from teacher space into the static embedding space.
//!
//! Teacher vectors come either from a CTXV file written by an external
//! exporter or from [`SyntheticTeacher`], a deterministic stand-in that
//! blends per-word random unit vectors with those of nearby words.
//!
//! CTXV layout (all integers little-endian):
//!
//! ```text
//! "CTXV" | u32 version = 1 | u32 d | u64 sentence_count
//! per sentence: u64 sentence_id | u32 n_tokens | n_tokens * d f32, row-major
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};

pub const MAGIC: [u8; 4] = *b"CTXV";
pub const VERSION: u32 = 1;

/// Contextual vectors for the tokens of one sentence, `len() x dim()`.
#[derive(Clone, Debug, PartialEq)]
pub struct TeacherVectors {
    pub sentence_id: u64,
    dim: usize,
    data: Vec<f32>,
}

impl TeacherVectors {
    pub fn new(sentence_id: u64, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sentence_id });
        }
        Ok(TeacherVectors {
            sentence_id,
            dim,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Widens every row to `f64`.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.len(),
            self.dim,
            self.data.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("shape checked at construction")
    }
}

/// Linear map `u = W_o · o` from teacher space (`d`) to embedding space
/// (`d_emb`). Any inner linear layer of the teacher head is folded into
/// `W_o`; there is no bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionLayer {
    weights: Matrix,
}

impl ProjectionLayer {
    /// Wraps a `d_emb x d` weight matrix.
    pub fn new(weights: Matrix) -> Self {
        ProjectionLayer { weights }
    }

    /// Uniform fan-in initialisation in `[-1/sqrt(d), 1/sqrt(d)]`.
    pub fn random<R: Rng + ?Sized>(d_emb: usize, d: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (d as f64).sqrt();
        let data = (0..d_emb * d)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        ProjectionLayer {
            weights: Matrix::from_vec(d_emb, d, data).expect("shape"),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn project(&self, o: &[f64]) -> Result<Vec<f64>> {
        self.weights.matvec(o)
    }
}

/// Deterministic stand-in for a pre-trained contextual encoder.
///
/// Each word type (or the group it is mapped to) gets a seeded random unit
/// vector `e(w)`. The vector for position `i` is
/// `(1 - mix) e(w_i) + mix * mean(e(w_k))` over in-bounds `k` with
/// `1 <= |k - i| <= 2`; a token without neighbours gets `e(w_i)`.
#[derive(Clone, Debug)]
pub struct SyntheticTeacher {
    seed: u64,
    dim: usize,
    mix: f64,
    groups: HashMap<String, String>,
}

/// Neighbourhood radius used by the synthetic blend.
pub const SYNTHETIC_RADIUS: usize = 2;

impl SyntheticTeacher {
    pub fn new(seed: u64, dim: usize, mix: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("teacher dimension must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&mix) {
            return Err(Error::InvalidParameter(format!("mix {mix} outside [0, 1]")));
        }
        Ok(SyntheticTeacher {
            seed,
            dim,
            mix,
            groups: HashMap::new(),
        })
    }

    /// Words mapped to the same group share one base vector.
    pub fn with_groups(mut self, groups: HashMap<String, String>) -> Self {
        self.groups = groups;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The unit base vector `e(w)`.
    pub fn base_vector(&self, word: &str) -> Vec<f64> {
        let key = self.groups.get(word).map(String::as_str).unwrap_or(word);
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(key.as_bytes()) ^ self.seed.rotate_left(17));
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    pub fn vectors(&self, sentence_id: u64, words: &[&str]) -> TeacherVectors {
        let bases: Vec<Vec<f64>> = words.iter().map(|w| self.base_vector(w)).collect();
        let n = words.len();
        let mut data = Vec::with_capacity(n * self.dim);
        for i in 0..n {
            let lo = i.saturating_sub(SYNTHETIC_RADIUS);
            let hi = (i + SYNTHETIC_RADIUS + 1).min(n);
            let neighbours: Vec<usize> = (lo..hi).filter(|&k| k != i).collect();
            let row = if neighbours.is_empty() || self.mix == 0.0 {
                bases[i].clone()
            } else {
                let mut mean = vec![0.0; self.dim];
                for &k in &neighbours {
                    axpy(1.0 / neighbours.len() as f64, &bases[k], &mut mean);
                }
                bases[i]
                    .iter()
                    .zip(&mean)
                    .map(|(b, m)| (1.0 - self.mix) * b + self.mix * m)
                    .collect()
            };
            data.extend(row.into_iter().map(|v| v as f32));
        }
        TeacherVectors {
            sentence_id,
            dim: self.dim,
            data,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Streaming CTXV writer. The sentence count is fixed up front.
pub struct TeacherWriter<W: Write> {
    writer: W,
    dim: usize,
    declared: u64,
    written: u64,
}

impl TeacherWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, dim: usize, sentence_count: u64) -> Result<Self> {
        TeacherWriter::new(BufWriter::new(File::create(path)?), dim, sentence_count)
    }
}

impl<W: Write> TeacherWriter<W> {
    pub fn new(mut writer: W, dim: usize, sentence_count: u64) -> Result<Self> {
        let dim32 = u32::try_from(dim)
            .map_err(|_| Error::InvalidParameter(format!("dimension {dim} exceeds u32")))?;
        writer.write_all(&MAGIC)?;
        writer.write_all(&VERSION.to_le_bytes())?;
        writer.write_all(&dim32.to_le_bytes())?;
        writer.write_all(&sentence_count.to_le_bytes())?;
        Ok(TeacherWriter {
            writer,
            dim,
            declared: sentence_count,
            written: 0,
        })
    }

    pub fn write(&mut self, record: &TeacherVectors) -> Result<()> {
        if record.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: record.dim,
            });
        }
        if self.written == self.declared {
            return Err(Error::InvalidParameter(format!(
                "more than the declared {} sentences written",
                self.declared
            )));
        }
        let n = u32::try_from(record.len())
            .map_err(|_| Error::InvalidParameter("sentence longer than u32::MAX tokens".into()))?;
        self.writer.write_all(&record.sentence_id.to_le_bytes())?;
        self.writer.write_all(&n.to_le_bytes())?;
        for v in &record.data {
            self.writer.write_all(&v.to_le_bytes())?;
        }
        self.written += 1;
        Ok(())
    }

    /// Flushes and checks that exactly the declared number of records went
    /// out.
    pub fn finish(mut self) -> Result<W> {
        if self.written != self.declared {
            return Err(Error::InvalidParameter(format!(
                "declared {} sentences, wrote {}",
                self.declared, self.written
            )));
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

/// Streaming CTXV reader yielding records in file order.
pub struct TeacherReader<R: Read> {
    reader: R,
    dim: usize,
    sentence_count: u64,
    next: u64,
    expected_lengths: Option<Vec<usize>>,
    failed: bool,
}

impl TeacherReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        TeacherReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> TeacherReader<R> {
    pub fn new(mut reader: R) -> Result<Self> {
        let header_err = |e: io::Error| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                Error::Truncated { sentence_id: 0 }
            } else {
                Error::Io(e)
            }
        };
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic).map_err(header_err)?;
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let version = read_u32(&mut reader).map_err(header_err)?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let dim = read_u32(&mut reader).map_err(header_err)? as usize;
        if dim == 0 {
            return Err(Error::InvalidParameter("teacher file declares d = 0".into()));
        }
        let sentence_count = read_u64(&mut reader).map_err(header_err)?;
        Ok(TeacherReader {
            reader,
            dim,
            sentence_count,
            next: 0,
            expected_lengths: None,
            failed: false,
        })
    }

    /// Checks every record against the token counts of the companion corpus
    /// lines, in order.
    pub fn with_expected_lengths(mut self, lengths: Vec<usize>) -> Result<Self> {
        if lengths.len() as u64 != self.sentence_count {
            return Err(Error::Misaligned {
                sentence_id: lengths.len().min(self.sentence_count as usize) as u64,
                message: format!(
                    "teacher file has {} sentences, corpus has {}",
                    self.sentence_count,
                    lengths.len()
                ),
            });
        }
        self.expected_lengths = Some(lengths);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sentence_count(&self) -> u64 {
        self.sentence_count
    }

    fn read_record(&mut self) -> Result<TeacherVectors> {
        let ordinal = self.next;
        let truncated = |id: u64| {
            move |e: io::Error| {
                if e.kind() == io::ErrorKind::UnexpectedEof {
                    Error::Truncated { sentence_id: id }
                } else {
                    Error::Io(e)
                }
            }
        };
        // Until the id itself is read, the record ordinal names the sentence.
        let sentence_id = read_u64(&mut self.reader).map_err(truncated(ordinal))?;
        let n = read_u32(&mut self.reader).map_err(truncated(sentence_id))? as usize;
        if let Some(lengths) = &self.expected_lengths {
            let expected = lengths[ordinal as usize];
            if expected != n {
                return Err(Error::LengthMismatch {
                    sentence_id,
                    expected,
                    found: n,
                });
            }
        }
        let mut bytes = vec![0u8; n * self.dim * 4];
        self.reader
            .read_exact(&mut bytes)
            .map_err(truncated(sentence_id))?;
        let data: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sentence_id });
        }
        Ok(TeacherVectors {
            sentence_id,
            dim: self.dim,
            data,
        })
    }
}

impl<R: Read> Iterator for TeacherReader<R> {
    type Item = Result<TeacherVectors>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next >= self.sentence_count {
            return None;
        }
        let record = self.read_record();
        self.next += 1;
        if record.is_err() {
            self.failed = true;
        }
        Some(record)
    }
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads every record of a CTXV file into memory.
pub fn read_teacher_file(
    path: impl AsRef<Path>,
    expected_lengths: Option<Vec<usize>>,
) -> Result<Vec<TeacherVectors>> {
    let mut reader = TeacherReader::open(path)?;
    if let Some(lengths) = expected_lengths {
        reader = reader.with_expected_lengths(lengths)?;
    }
    reader.collect()
}

/// Writes records to a CTXV file.
pub fn write_teacher_file(path: impl AsRef<Path>, dim: usize, records: &[TeacherVectors]) -> Result<()> {
    let mut w = TeacherWriter::create(path, dim, records.len() as u64)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()?;
    Ok(())
}
