//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Columns of the returned matrix are the eigenvectors.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Thin SVD `m = U diag(s) Vᵀ` with singular values in descending order.
pub fn svd_desc(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let values = order.iter().map(|&i| s[i]).collect();
    let u = u.select_columns(&order);
    let v = v_t.transpose().select_columns(&order);
    (u, values, v)
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Count of singular values above `max(rows, cols) · σ_max · ε`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * smax * f64::EPSILON;
    s.iter().filter(|&&v| v > tol).count()
}

/// Largest off-diagonal magnitude relative to the trace.
pub fn off_diagonal_ratio(m: &DMatrix<f64>) -> f64 {
    let trace = m.trace().abs();
    let mut off: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                off += m[(i, j)].abs();
            }
        }
    }
    if trace == 0.0 {
        off
    } else {
        off / trace
    }
}

/// Row-major matrix for text serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixData {
    fn from(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixData {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl MatrixData {
    pub fn to_matrix(&self) -> crate::Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(crate::Error::Serde(format!(
                "matrix data has {} entries for {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// Serde adapter storing a `DMatrix` as [`MatrixData`].
pub mod matrix_serde {
    use super::MatrixData;
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        MatrixData::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let data = MatrixData::deserialize(d)?;
        data.to_matrix().map_err(serde::de::Error::custom)
    }
}
