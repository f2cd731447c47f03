//! Versioned binary checkpoint of the full trainable state.
//!
//! ```text
//! "CTXC" | u32 version = 1 | u32 config_len | config (JSON, UTF-8)
//! matrix: table | matrix: W_o | u8 has_attention | [matrix: W1 | matrix: W2]
//! matrix := u64 rows | u64 cols | rows * cols f64, little-endian, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AttentionLayer, AttentionMode, DenseParams, EmbeddingMatrix, ModelState, TrainerConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::teacher::ProjectionLayer;

const MAGIC: [u8; 4] = *b"CTXC";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: TrainerConfig,
    pub state: ModelState,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let config = serde_json::to_vec(&self.config)
            .map_err(|e| Error::Checkpoint(format!("cannot serialize config: {e}")))?;
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(config.len() as u32).to_le_bytes())?;
        w.write_all(&config)?;
        write_matrix(&mut w, self.state.embeddings.matrix())?;
        write_matrix(&mut w, self.state.params.projection.weights())?;
        match &self.state.params.attention {
            Some(layer) => {
                w.write_all(&[1])?;
                write_matrix(&mut w, &layer.w1)?;
                write_matrix(&mut w, &layer.w2)?;
            }
            None => w.write_all(&[0])?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let len = read_u32(&mut r)? as usize;
        let mut config = vec![0u8; len];
        r.read_exact(&mut config)?;
        let config: TrainerConfig = serde_json::from_slice(&config)
            .map_err(|e| Error::Checkpoint(format!("bad config: {e}")))?;
        let table = read_matrix(&mut r)?;
        let w_o = read_matrix(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let attention = match flag[0] {
            0 => None,
            1 => Some(AttentionLayer {
                w1: read_matrix(&mut r)?,
                w2: read_matrix(&mut r)?,
                lambda1: config.lambda1,
                lambda2: config.lambda2,
                phi: config.phi,
            }),
            other => return Err(Error::Checkpoint(format!("bad attention flag {other}"))),
        };
        if attention.is_some() != (config.attention_mode == AttentionMode::Explicit) {
            return Err(Error::Checkpoint("attention layer does not match attention mode".into()));
        }
        Ok(Checkpoint {
            config,
            state: ModelState {
                embeddings: EmbeddingMatrix::from_matrix(table),
                params: DenseParams {
                    projection: ProjectionLayer::new(w_o),
                    attention,
                },
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn write_matrix<W: Write>(w: &mut W, m: &Matrix) -> Result<()> {
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R) -> Result<Matrix> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Checkpoint("matrix shape overflows".into()))?;
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
