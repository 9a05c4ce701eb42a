//! Small dense real matrices.
//!
//! [`SquareMatrix`] is the substrate for every group and Lie-algebra
//! computation in the crate. Entries are always finite and the dimension is
//! between 2 and [`MAX_DIM`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

#[derive(Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(n, bad.len()));
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Row-major construction from a flat slice of `n * n` entries.
    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(n * n, data.len()));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if m.nrows() < 2 || m.nrows() > MAX_DIM {
            return Err(Error::InvalidMatrix(format!(
                "dimension {} outside [2, {MAX_DIM}]",
                m.nrows()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// Matrix unit `E_{ij}`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        Self(m)
    }

    pub fn diag(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    /// Block-diagonal embedding of the given blocks.
    pub fn block_diag(blocks: &[&SquareMatrix]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut m = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let k = b.dim();
            m.view_mut((off, off), (k, k)).copy_from(&b.0);
            off += k;
        }
        Self::from_dmatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    /// Entries flattened row-major.
    pub fn row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.0.clone().try_inverse().ok_or(Error::Singular)?;
        if inv.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(Self(inv))
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius() <= tol
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&SquareMatrix> for &SquareMatrix {
            type Output = SquareMatrix;
            fn $m(self, rhs: &SquareMatrix) -> SquareMatrix {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                SquareMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<SquareMatrix> for SquareMatrix {
            type Output = SquareMatrix;
            fn $m(self, rhs: SquareMatrix) -> SquareMatrix {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &SquareMatrix {
    type Output = SquareMatrix;
    fn neg(self) -> SquareMatrix {
        SquareMatrix(-&self.0)
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SquareMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(SquareMatrix::from_rows(&[vec![1.0]]).is_err());
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(SquareMatrix::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(SquareMatrix::from_row_slice(17, &vec![0.0; 289]).is_err());
    }

    #[test]
    fn json_is_array_of_arrays() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.5]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.5]]");
        let back: SquareMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SquareMatrix>("[[1.0,2.0]]").is_err());
    }

    #[test]
    fn block_diag_places_blocks() {
        let a = SquareMatrix::unit(2, 0, 1);
        let m = SquareMatrix::block_diag(&[&a, &a]).unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(2, 3), 1.0);
        assert_eq!(m.frobenius(), 2f64.sqrt());
    }
}
