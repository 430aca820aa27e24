//! Dense column-major kernels shared by the solvers, the oracle and the
//! problem generators.
//!
//! Every reduction is a plain sequential loop over rows in ascending order,
//! so results are bit-for-bit reproducible on a given platform. Column
//! indices are 0-based.

use crate::error::{Error, Result};

/// Column-major dense `rows x cols` matrix with cached squared column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_norms_sq: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let col_norms_sq = data.chunks_exact(rows).map(|c| dot(c, c)).collect();
        Ok(Self {
            rows,
            cols,
            data,
            col_norms_sq,
        })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_col_major(n, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Raw column-major storage.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    /// Column `j` as a contiguous slice.
    ///
    /// Panics if `j >= cols`; use [`DenseMatrix::try_column`] for a checked
    /// variant.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn try_column(&self, j: usize) -> Result<&[f64]> {
        self.check_index(j)?;
        Ok(self.column(j))
    }

    #[inline]
    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j < self.cols {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: j,
                cols: self.cols,
            })
        }
    }

    /// Squared column norms `N(j) = ||A_j||^2`.
    ///
    /// Fails with [`Error::ZeroColumn`] on the first zero column, since the
    /// coordinate methods are undefined there.
    pub fn column_norms_sq(&self) -> Result<&[f64]> {
        match self.col_norms_sq.iter().position(|&v| v == 0.0) {
            Some(j) => Err(Error::ZeroColumn(j)),
            None => Ok(&self.col_norms_sq),
        }
    }

    /// Cached `||A_j||^2` without the zero-column check.
    #[inline]
    pub fn column_norm_sq(&self, j: usize) -> f64 {
        self.col_norms_sq[j]
    }

    /// `<A_i, A_j>`, summed over rows in ascending order.
    pub fn dot_columns(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(dot(self.column(i), self.column(j)))
    }

    /// `<A_j, v>` for a vector of length `rows`.
    #[inline]
    pub(crate) fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        dot(self.column(j), v)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.col_norms_sq.iter().sum()
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec operand", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `A^T r`.
    pub fn matvec_transpose(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("transpose operand", self.rows, r.len())?;
        Ok((0..self.cols).map(|j| self.col_dot(j, r)).collect())
    }

    /// `b - A x`.
    pub fn residual(&self, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len("right-hand side", self.rows, b.len())?;
        let ax = self.matvec(x)?;
        Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
    }

    /// `||v||_{A^T A} = ||A v||`.
    pub fn seminorm(&self, v: &[f64]) -> Result<f64> {
        let av = self.matvec(v)?;
        Ok(norm(&av))
    }

    /// Copy of the matrix with every column scaled to unit norm.
    pub fn unitized(&self) -> Result<Self> {
        let norms = self.column_norms_sq()?;
        let mut data = self.data.clone();
        for (j, col) in data.chunks_exact_mut(self.rows).enumerate() {
            let s = norms[j].sqrt();
            col.iter_mut().for_each(|v| *v /= s);
        }
        Self::from_col_major(self.rows, self.cols, data)
    }
}

#[inline]
pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

pub(crate) fn check_finite(what: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `||a - b||^2`
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}
