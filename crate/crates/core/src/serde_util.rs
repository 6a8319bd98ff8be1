//! JSON representation of complex data.
//!
//! Complex numbers are written as `[re, im]` pairs; a bare number is accepted on input as a
//! real value. Matrices are row-major nested arrays, vectors are flat arrays.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{CMatrix, CVector, C64};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for C64 {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(x) => C64::new(x, 0.0),
            ComplexRepr::Pair([re, im]) => C64::new(re, im),
        }
    }
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(ComplexRepr::deserialize(d)?.into())
    }
}

pub mod cvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<[f64; 2]> = v.iter().map(pair).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let raw = Vec::<ComplexRepr>::deserialize(d)?;
        Ok(CVector::from_iterator(raw.len(), raw.into_iter().map(C64::from)))
    }
}

pub mod cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let raw = Vec::<Vec<ComplexRepr>>::deserialize(d)?;
        from_rows(raw).map_err(D::Error::custom)
    }

    pub(crate) fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect())
            .collect()
    }

    pub(super) fn from_rows(raw: Vec<Vec<ComplexRepr>>) -> Result<CMatrix, String> {
        let nrows = raw.len();
        if nrows == 0 {
            return Err("matrix must have at least one row".into());
        }
        let ncols = raw[0].len();
        if ncols == 0 || raw.iter().any(|r| r.len() != ncols) {
            return Err(format!("ragged or empty matrix rows (first row has {ncols} entries)"));
        }
        let flat: Vec<C64> = raw.into_iter().flatten().map(C64::from).collect();
        Ok(CMatrix::from_row_slice(nrows, ncols, &flat))
    }
}

pub mod cmatrix_vec {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        let all: Vec<_> = ms.iter().map(cmatrix::to_rows).collect();
        all.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let raw = Vec::<Vec<Vec<ComplexRepr>>>::deserialize(d)?;
        raw.into_iter()
            .map(|m| cmatrix::from_rows(m).map_err(D::Error::custom))
            .collect()
    }
}

/// Plain `[re, im]` rows of a matrix, handy for building report structs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    cmatrix::to_rows(m)
}
