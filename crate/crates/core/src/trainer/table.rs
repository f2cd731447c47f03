use std::sync::atomic::{AtomicU64, Ordering};

use crate::linalg::Matrix;

/// Embedding rows shared between training workers.
///
/// Each component is an `f64` stored as bits in an `AtomicU64`. Updates are
/// a relaxed load followed by a relaxed store, so concurrent writers to the
/// same row may drop each other's contribution; rows touched by a single
/// thread behave exactly like a plain `Vec<f64>`.
pub(crate) struct SharedTable {
    dim: usize,
    data: Vec<AtomicU64>,
}

impl SharedTable {
    pub(crate) fn from_matrix(m: &Matrix) -> Self {
        SharedTable {
            dim: m.cols(),
            data: m.as_slice().iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    pub(crate) fn read_row(&self, row: u32, out: &mut Vec<f64>) {
        let start = row as usize * self.dim;
        out.clear();
        out.extend(
            self.data[start..start + self.dim]
                .iter()
                .map(|a| f64::from_bits(a.load(Ordering::Relaxed))),
        );
    }

    pub(crate) fn add_to_row(&self, row: u32, alpha: f64, grad: &[f64]) {
        let start = row as usize * self.dim;
        for (cell, g) in self.data[start..start + self.dim].iter().zip(grad) {
            let v = f64::from_bits(cell.load(Ordering::Relaxed)) + alpha * g;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub(crate) fn to_matrix(&self) -> Matrix {
        let rows = self.data.len() / self.dim;
        let data = self
            .data
            .iter()
            .map(|a| f64::from_bits(a.load(Ordering::Relaxed)))
            .collect();
        Matrix::from_vec(rows, self.dim, data).expect("shape")
    }
}
