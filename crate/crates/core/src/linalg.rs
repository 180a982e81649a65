//! Dense matrices over GF(q) with exact Gaussian elimination.
//!
//! Entries are field indices (see [`crate::galois`]). Zero-row matrices are
//! allowed so that empty bases (e.g. the kernel of an invertible matrix) have
//! a representation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{Field, FieldSpec, GaloisError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("right-hand side is not in the row space")]
    Inconsistent,
    #[error("matrix is singular")]
    Singular,
    #[error("index ({0}, {1}) out of range for block size {2} and {3} blocks")]
    IndexOutOfRange(usize, usize, usize, usize),
    #[error(transparent)]
    Field(#[from] GaloisError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Result of [`Matrix::rref`].
#[derive(Debug, Clone)]
pub struct Rref {
    pub reduced: Matrix,
    pub rank: usize,
    /// Zero-based pivot columns, ascending.
    pub pivots: Vec<usize>,
}

/// Zero-based position of the 1-based pair `(major, minor)` in a vector made
/// of blocks of length `block`: `(major - 1) * block + (minor - 1)`.
///
/// With `block = beta` this is the row coordinate `(i, b)`; with `block = n`
/// it is the column coordinate `(p, s)`.
pub fn pair_index(
    major: usize,
    minor: usize,
    block: usize,
    blocks: usize,
) -> Result<usize, LinalgError> {
    if major == 0 || minor == 0 || major > blocks || minor > block {
        return Err(LinalgError::IndexOutOfRange(major, minor, block, blocks));
    }
    Ok((major - 1) * block + (minor - 1))
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch("ragged rows".into()));
            }
            for &x in row {
                if !field.contains(x) {
                    return Err(GaloisError::OutOfRange(x as u64, field.order()).into());
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Empty basis of vectors of length `cols`.
    pub fn empty(field: &Field, cols: usize) -> Self {
        Self::zeros(field, 0, cols)
    }

    pub fn row_vector(field: &Field, v: &[u32]) -> Self {
        Matrix {
            field: field.clone(),
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    /// Standard basis vector `e^len_pos` (zero-based `pos`) as a row.
    pub fn unit_row(field: &Field, len: usize, pos: usize) -> Self {
        let mut m = Self::zeros(field, 1, len);
        m.set(0, pos, 1);
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(r);
                for (d, &b) in dst.iter_mut().zip(src) {
                    if b != 0 {
                        *d = f.add(*d, f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u32]) -> Result<Vec<u32>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![0u32; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (d, &b) in out.iter_mut().zip(self.row(r)) {
                *d = f.add(*d, f.mul(a, b));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimensionMismatch("matrix sum".into()));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        let f = &self.field;
        let neg = Matrix {
            data: other.data.iter().map(|&b| f.neg(b)).collect(),
            ..other.clone()
        };
        self.add(&neg)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch("vstack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// `diag(a, b)`.
    pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Self::zeros(&a.field, a.rows + b.rows, a.cols + b.cols);
        for r in 0..a.rows {
            out.row_mut(r)[..a.cols].copy_from_slice(a.row(r));
        }
        for r in 0..b.rows {
            out.row_mut(a.rows + r)[a.cols..].copy_from_slice(b.row(r));
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Self::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field.clone(),
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Reduced row echelon form, pivoting on the first nonzero entry of each
    /// column scanned left to right.
    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            if pr != lead {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, lead * m.cols + j);
                }
            }
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            for x in m.row_mut(lead) {
                *x = f.mul(*x, inv);
            }
            let pivot_row = m.row(lead).to_vec();
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let factor = m.get(r, c);
                if factor == 0 {
                    continue;
                }
                let neg = f.neg(factor);
                for (x, &y) in m.row_mut(r).iter_mut().zip(&pivot_row) {
                    if y != 0 {
                        *x = f.add(*x, f.mul(neg, y));
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        Rref {
            reduced: m,
            rank: pivots.len(),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_basis(&self) -> Matrix {
        let r = self.rref();
        r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>())
    }

    /// Basis (as rows) of the right null space `{v : M v^T = 0}`.
    pub fn kernel(&self) -> Matrix {
        let f = &self.field;
        let Rref {
            reduced, pivots, ..
        } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                out.set(i, pc, f.neg(reduced.get(pr, fc)));
            }
        }
        out
    }

    /// Some `x` with `x * self = b`.
    pub fn solve_left(&self, b: &[u32]) -> Result<Vec<u32>, LinalgError> {
        if b.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for {} columns",
                b.len(),
                self.cols
            )));
        }
        // Solve A^T x^T = b^T via RREF of the augmented [A^T | b^T].
        let f = &self.field;
        let at = self.transpose();
        let mut aug = Self::zeros(f, at.rows, at.cols + 1);
        for r in 0..at.rows {
            aug.row_mut(r)[..at.cols].copy_from_slice(at.row(r));
            aug.set(r, at.cols, b[r]);
        }
        let Rref {
            reduced, pivots, ..
        } = aug.rref();
        if pivots.last() == Some(&at.cols) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = vec![0u32; self.rows];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = reduced.get(pr, at.cols);
        }
        Ok(x)
    }

    pub fn in_row_space(&self, v: &[u32]) -> bool {
        v.len() == self.cols && (v.iter().all(|&x| x == 0) || self.solve_left(v).is_ok())
    }

    /// Whether every row of `other` lies in the row space of `self`.
    pub fn contains_row_space(&self, other: &Matrix) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let r = self.rank();
        self.vstack(other).map(|s| s.rank() == r).unwrap_or(false)
    }

    pub fn same_row_space(&self, other: &Matrix) -> bool {
        self.contains_row_space(other) && other.contains_row_space(self)
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("inverse of non-square".into()));
        }
        let n = self.rows;
        let f = &self.field;
        let mut aug = Self::zeros(f, n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.set(r, n + r, 1);
        }
        let rr = aug.rref();
        if rr.pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) || rr.rank < n {
            return Err(LinalgError::Singular);
        }
        let mut inv = Self::zeros(f, n, n);
        for r in 0..n {
            inv.row_mut(r).copy_from_slice(&rr.reduced.row(r)[n..]);
        }
        Ok(inv)
    }

    pub fn to_serial(&self) -> MatrixSerial {
        MatrixSerial {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.clone(),
        }
    }

    pub fn from_serial(field: &Field, s: &MatrixSerial) -> Result<Self, LinalgError> {
        if s.entries.len() != s.rows * s.cols {
            return Err(LinalgError::DimensionMismatch("serialized entry count".into()));
        }
        if let Some(&bad) = s.entries.iter().find(|&&x| !field.contains(x)) {
            return Err(GaloisError::OutOfRange(bad as u64, field.order()).into());
        }
        Ok(Matrix {
            field: field.clone(),
            rows: s.rows,
            cols: s.cols,
            data: s.entries.clone(),
        })
    }
}

/// Wire form of a matrix: dimensions plus row-major integer entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSerial {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u32>,
}

/// A matrix together with its field descriptor, for standalone documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub field: FieldSpec,
    #[serde(flatten)]
    pub matrix: MatrixSerial,
}
