//! JSON matrix files: `{ "dim": n, "entries": [[...], ...] }`, row-major.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SymmetricOperator;
use crate::error::{OmegaError, Result};

/// Asymmetry above this (absolute) is rejected; anything smaller is averaged away.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_operator(h: &SymmetricOperator) -> Self {
        Self {
            dim: h.dim(),
            entries: h.rows(),
        }
    }

    pub fn into_operator(self) -> Result<SymmetricOperator> {
        let n = self.dim;
        if self.entries.len() != n {
            return Err(OmegaError::MalformedMatrix(format!(
                "dim is {n} but {} rows given",
                self.entries.len()
            )));
        }
        if let Some((i, row)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(OmegaError::MalformedMatrix(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.entries[i][j]);
        if m.iter().any(|x| !x.is_finite()) {
            return Err(OmegaError::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let deviation = (m[(i, j)] - m[(j, i)]).abs();
                if deviation > ASYMMETRY_TOLERANCE {
                    return Err(OmegaError::Asymmetric {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        SymmetricOperator::symmetrized(m)
    }
}

pub fn parse_matrix_json(text: &str) -> Result<SymmetricOperator> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| OmegaError::MalformedMatrix(e.to_string()))?;
    file.into_operator()
}

pub fn matrix_to_json(h: &SymmetricOperator) -> String {
    serde_json::to_string(&MatrixFile::from_operator(h)).expect("matrix serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_small_noise() {
        let h =
            parse_matrix_json(r#"{"dim":2,"entries":[[1.0,0.5],[0.5000000000001,2.0]]}"#).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)]);
        assert!((h.matrix()[(0, 1)] - 0.50000000000005).abs() < 1e-16);
    }

    #[test]
    fn rejects_real_asymmetry() {
        let err = parse_matrix_json(r#"{"dim":2,"entries":[[1.0,0.5],[0.6,2.0]]}"#).unwrap_err();
        assert_eq!(err.kind(), "Asymmetric");
    }

    #[test]
    fn rejects_shape_errors() {
        assert_eq!(
            parse_matrix_json(r#"{"dim":3,"entries":[[1.0,0.0],[0.0,1.0]]}"#)
                .unwrap_err()
                .kind(),
            "MalformedMatrix"
        );
        assert_eq!(
            parse_matrix_json(r#"{"dim":2,"entries":[[1.0],[0.0,1.0]]}"#)
                .unwrap_err()
                .kind(),
            "MalformedMatrix"
        );
        assert_eq!(
            parse_matrix_json("not json").unwrap_err().kind(),
            "MalformedMatrix"
        );
    }

    #[test]
    fn writes_and_reads_back() {
        let h = SymmetricOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(parse_matrix_json(&matrix_to_json(&h)).unwrap(), h);
    }
}
