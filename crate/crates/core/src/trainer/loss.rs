//! The three per-example loss terms and their analytic gradients.
//!
//! All terms are written for a single center position; the corpus-level
//! losses are sums of these over every example.

use crate::linalg::{axpy, dot, log_sigmoid, norm, sigmoid};

use super::EmbeddingMatrix;

/// Semantic term `-log σ(ŝᵀ û)`, with `s` the sum of the context rows and
/// `u` the projected center vector. Hats denote L2 normalisation, which can
/// be switched off.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticLoss {
    pub loss: f64,
    /// Gradient with respect to the context sum. Every context row receives
    /// this same gradient.
    pub grad_context: Vec<f64>,
    pub grad_center: Vec<f64>,
}

pub fn semantic_loss(context_sum: &[f64], u_center: &[f64], normalize: bool) -> SemanticLoss {
    if !normalize {
        let x = dot(context_sum, u_center);
        let g = -sigmoid(-x);
        return SemanticLoss {
            loss: -log_sigmoid(x),
            grad_context: u_center.iter().map(|v| g * v).collect(),
            grad_center: context_sum.iter().map(|v| g * v).collect(),
        };
    }
    let ns = norm(context_sum);
    let nu = norm(u_center);
    if ns == 0.0 || nu == 0.0 {
        // The cosine is pinned at zero and has no usable derivative.
        return SemanticLoss {
            loss: std::f64::consts::LN_2,
            grad_context: vec![0.0; context_sum.len()],
            grad_center: vec![0.0; u_center.len()],
        };
    }
    let c = dot(context_sum, u_center) / (ns * nu);
    let g = -sigmoid(-c);
    // d cos / d s = (û - c ŝ) / |s|, and symmetrically for u
    let grad_context = context_sum
        .iter()
        .zip(u_center)
        .map(|(s, u)| g * (u / nu - c * s / ns) / ns)
        .collect();
    let grad_center = context_sum
        .iter()
        .zip(u_center)
        .map(|(s, u)| g * (s / ns - c * u / nu) / nu)
        .collect();
    SemanticLoss {
        loss: -log_sigmoid(c),
        grad_context,
        grad_center,
    }
}

/// Semantic term over rows of the embedding table.
pub fn loss_semantic(
    emb: &EmbeddingMatrix,
    context_ids: &[u32],
    u_center: &[f64],
    normalize: bool,
) -> SemanticLoss {
    let mut sum = vec![0.0; emb.dim()];
    for &id in context_ids {
        axpy(1.0, emb.row(id), &mut sum);
    }
    semantic_loss(&sum, u_center, normalize)
}

/// Loss value with gradients for both operands of an inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct PairLoss {
    pub loss: f64,
    pub grad_left: Vec<f64>,
    pub grad_right: Vec<f64>,
}

/// Contextualized term `-log σ(vᵀu)` for the attention output `v` and the
/// projected center vector `u`. `grad_left` is with respect to `v`.
pub fn loss_contextualized(v_context: &[f64], u_center: &[f64]) -> PairLoss {
    let x = dot(v_context, u_center);
    let g = -sigmoid(-x);
    PairLoss {
        loss: -log_sigmoid(x),
        grad_left: u_center.iter().map(|v| g * v).collect(),
        grad_right: v_context.iter().map(|v| g * v).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativeLoss {
    pub loss: f64,
    /// One gradient per negative slot, in input order.
    pub grad_negatives: Vec<Vec<f64>>,
    pub grad_center: Vec<f64>,
}

/// Negative term `Σ_m log σ(u′_mᵀ u)`, taken with the sign it carries in the
/// joint objective: minimising it drives every negative score down.
pub fn negative_loss(negative_rows: &[&[f64]], u_center: &[f64]) -> NegativeLoss {
    let mut loss = 0.0;
    let mut grad_center = vec![0.0; u_center.len()];
    let mut grad_negatives = Vec::with_capacity(negative_rows.len());
    for row in negative_rows {
        let x = dot(row, u_center);
        loss += log_sigmoid(x);
        // d/dx log σ(x) = σ(-x)
        let g = sigmoid(-x);
        grad_negatives.push(u_center.iter().map(|v| g * v).collect());
        axpy(g, row, &mut grad_center);
    }
    NegativeLoss {
        loss,
        grad_negatives,
        grad_center,
    }
}

pub fn loss_negative(emb: &EmbeddingMatrix, negative_ids: &[u32], u_center: &[f64]) -> NegativeLoss {
    let rows: Vec<&[f64]> = negative_ids.iter().map(|&id| emb.row(id)).collect();
    negative_loss(&rows, u_center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    // -log σ(1), evaluated independently
    const NEG_LOG_SIGMOID_ONE: f64 = 0.313_261_687_518_222_8;

    #[test]
    fn orthogonal_semantic_is_log_two() {
        let l = semantic_loss(&[1.0, 0.0], &[0.0, 3.0], true);
        assert_relative_eq!(l.loss, LN_2, max_relative = 1e-15);
        let l = semantic_loss(&[1.0, 0.0], &[0.0, 3.0], false);
        assert_relative_eq!(l.loss, LN_2, max_relative = 1e-15);
    }

    #[test]
    fn parallel_semantic_is_neg_log_sigmoid_one() {
        let l = semantic_loss(&[0.0, 2.0, 0.0], &[0.0, 5.0, 0.0], true);
        assert_relative_eq!(l.loss, NEG_LOG_SIGMOID_ONE, max_relative = 1e-14);
        // parallel inputs: the cosine is at its maximum, so no gradient
        assert!(l.grad_context.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn contextualized_reference_values() {
        assert_relative_eq!(loss_contextualized(&[1.0, 0.0], &[0.0, 1.0]).loss, LN_2);
        let u = [0.6, 0.8];
        assert_relative_eq!(
            loss_contextualized(&u, &u).loss,
            NEG_LOG_SIGMOID_ONE,
            max_relative = 1e-14
        );
    }

    #[test]
    fn negative_reference_values() {
        let u = [0.0, 1.0];
        let orth: [&[f64]; 3] = [&[1.0, 0.0], &[2.0, 0.0], &[-1.0, 0.0]];
        assert_relative_eq!(negative_loss(&orth, &u).loss, -3.0 * LN_2, max_relative = 1e-15);
        let same: [&[f64]; 1] = [&u];
        assert_relative_eq!(
            negative_loss(&same, &u).loss,
            -NEG_LOG_SIGMOID_ONE,
            max_relative = 1e-14
        );
    }

    #[test]
    fn zero_context_sum_has_no_gradient() {
        let l = semantic_loss(&[0.0, 0.0], &[1.0, 2.0], true);
        assert_eq!(l.loss, LN_2);
        assert_eq!(l.grad_center, vec![0.0, 0.0]);
    }
}
