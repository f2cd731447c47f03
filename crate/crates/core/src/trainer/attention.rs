//! Tied contextualized attention over the teacher vectors of context words.
//!
//! `V_context = λ₁ o_cᵀ W₁ + λ₂ φ(mean_k o_k)ᵀ W₂`, with one `W₂` shared by
//! every context position. For linear `φ` this equals averaging the
//! per-position outputs `φ(o_kᵀ W₂)`; for `tanh` the pooled form is what is
//! computed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phi {
    #[default]
    None,
    Tanh,
}

impl Phi {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Phi::None => x,
            Phi::Tanh => x.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionLayer {
    /// `d x d_emb`, applied to the center vector.
    pub w1: Matrix,
    /// `d x d_emb`, shared across context positions.
    pub w2: Matrix,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi: Phi,
}

/// Forward result kept for the backward pass.
#[derive(Clone, Debug)]
pub struct AttentionForward {
    pub output: Vec<f64>,
    /// `φ(mean_k o_k)`
    pub pooled: Vec<f64>,
}

impl AttentionLayer {
    pub fn random<R: Rng + ?Sized>(
        d: usize,
        d_emb: usize,
        lambda1: f64,
        lambda2: f64,
        phi: Phi,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (d as f64).sqrt();
        let mut init = || {
            let data = (0..d * d_emb)
                .map(|_| rng.random_range(-bound..=bound))
                .collect();
            Matrix::from_vec(d, d_emb, data).expect("shape")
        };
        let w1 = init();
        let w2 = init();
        AttentionLayer {
            w1,
            w2,
            lambda1,
            lambda2,
            phi,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn forward(&self, o_center: &[f64], o_context: &[&[f64]]) -> Result<AttentionForward> {
        let d = self.input_dim();
        if o_context.is_empty() {
            return Err(Error::InvalidParameter("attention needs at least one context vector".into()));
        }
        if o_center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: o_center.len(),
            });
        }
        let mut mean = vec![0.0; d];
        let inv = 1.0 / o_context.len() as f64;
        for o in o_context {
            if o.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: o.len(),
                });
            }
            axpy(inv, o, &mut mean);
        }
        let pooled: Vec<f64> = mean.into_iter().map(|x| self.phi.apply(x)).collect();
        let mut output = self.w1.vecmat(o_center)?;
        output.iter_mut().for_each(|x| *x *= self.lambda1);
        let ctx = self.w2.vecmat(&pooled)?;
        axpy(self.lambda2, &ctx, &mut output);
        Ok(AttentionForward { output, pooled })
    }

    /// `λ₁ o_cᵀW₁ + λ₂ φ(mean o_k)ᵀW₂`
    pub fn attention_context(&self, o_center: &[f64], o_context: &[&[f64]]) -> Result<Vec<f64>> {
        self.forward(o_center, o_context).map(|f| f.output)
    }

    /// Adds `scale · ∂(gᵀV)/∂W` for upstream gradient `grad_output` into the
    /// two accumulators.
    pub fn accumulate_grads(
        &self,
        o_center: &[f64],
        pooled: &[f64],
        grad_output: &[f64],
        scale: f64,
        grad_w1: &mut Matrix,
        grad_w2: &mut Matrix,
    ) {
        grad_w1.add_outer(scale * self.lambda1, o_center, grad_output);
        grad_w2.add_outer(scale * self.lambda2, pooled, grad_output);
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.w2.is_finite()
    }
}
