//! JSON matrix exchange format: `{"dims":[...], "re":[[...]], "im":[[...]]}`
//! with row-major real and imaginary parts.

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix, dims: Option<Vec<usize>>) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|col| f(&m[(r, col)])).collect()).collect()
        };
        Self { dims, re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.data(), Some(rho.dims().to_vec()))
    }

    /// Missing `im` means a real matrix.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged rows in \"re\"".into()));
        }
        if !self.im.is_empty() && (self.im.len() != rows || self.im.iter().any(|r| r.len() != cols)) {
            return Err(Error::Parse("\"im\" shape differs from \"re\"".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, col| {
            c(self.re[r][col], self.im.get(r).map_or(0.0, |row| row[col]))
        }))
    }

    /// Validated density matrix; absent `dims` means a single subsystem.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let m = self.to_matrix()?;
        let dims = self.dims.clone().unwrap_or_else(|| vec![m.nrows()]);
        DensityMatrix::new(m, dims)
    }
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    serde_json::from_str::<MatrixJson>(text)?.to_density()
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_density(rho)).expect("matrix serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_matrix_without_im() {
        let rho = density_from_json(r#"{"dims":[2],"re":[[0.5,0.5],[0.5,0.5]]}"#).unwrap();
        assert_eq!(rho.dims(), &[2]);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_error_surfaces() {
        let err = density_from_json(r#"{"dims":[2],"re":[[1,0],[0,0.1]],"im":[[0,0],[0,0]]}"#).unwrap_err();
        assert_eq!(err.name(), "TraceNotOne");
    }

    #[test]
    fn roundtrip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.4, 0.0)]);
        let rho = DensityMatrix::new(m, vec![2]).unwrap();
        assert_eq!(density_from_json(&density_to_json(&rho)).unwrap(), rho);
    }

    #[test]
    fn ragged_input_rejected() {
        assert!(density_from_json(r#"{"re":[[1,0],[0]]}"#).is_err());
    }
}
