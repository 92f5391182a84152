//! Matrix and vector JSON formats shared by every file the workbench reads or writes.
//!
//! Matrix: `{"rows": r, "cols": c, "complex": true|false, "data": [...]}` with
//! `data` in row-major order. Complex entries are `[re, im]` pairs; real
//! matrices use plain scalars (pairs are accepted on input too).
//!
//! Vector: a plain JSON array of `[re, im]` pairs or scalars.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, RMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub complex: bool,
    pub data: Vec<Entry>,
}

impl MatrixJson {
    pub fn from_complex(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push(Entry::Complex([z.re, z.im]));
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            complex: true,
            data,
        }
    }

    pub fn from_real(m: &RMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(Entry::Real(m[(i, j)]));
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            complex: false,
            data,
        }
    }

    pub fn to_complex(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::MalformedJson(format!(
                "{}x{} matrix carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|e| e.value()),
        ))
    }

    /// Real view; fails if any entry has a nonzero imaginary part.
    pub fn to_real(&self) -> Result<RMatrix> {
        let m = self.to_complex()?;
        if m.iter().any(|z| z.im != 0.0) {
            return Err(Error::MalformedJson("expected a real matrix".into()));
        }
        Ok(m.map(|z| z.re))
    }
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(entries: &[Entry]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|e| e.value()))
}

/// serde adapter: `#[serde(with = "crate::json::complex_matrix")]`.
pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_complex(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_complex()
            .map_err(serde::de::Error::custom)
    }
}

/// serde adapter for real matrices.
pub mod real_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &RMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_real(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<RMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_real()
            .map_err(serde::de::Error::custom)
    }
}

/// serde adapter for complex vectors.
pub mod complex_vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_json(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(vector_from_json(&entries))
    }
}
