//! Symplectic geometry of `F_q^{2n}` and the coset decode that stands in for
//! the stabilizer measurement.
//!
//! Vectors are split as `(a | b)` with `a, b` in `F_q^n`. The form is
//! `x J y^T` with `J = [[0, -I], [I, 0]]`, i.e. `<(a,b), (c,d)> = b.c - a.d`;
//! [`symp_form`] returns its trace to the prime field.

use thiserror::Error;

use crate::galois::Field;
use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymplecticError {
    #[error("vectors have lengths {0} and {1}; expected equal even lengths")]
    LengthMismatch(usize, usize),
    #[error("stacked basis has rank {0}, expected {1}")]
    SingularBasis(usize, usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_lengths(x: &[u32], y: &[u32]) -> Result<usize, SymplecticError> {
    if x.len() != y.len() || !x.len().is_multiple_of(2) {
        return Err(SymplecticError::LengthMismatch(x.len(), y.len()));
    }
    Ok(x.len() / 2)
}

/// The `F_q`-bilinear value `x J y^T`.
pub fn symp_bilinear(field: &Field, x: &[u32], y: &[u32]) -> Result<u32, SymplecticError> {
    let n = check_lengths(x, y)?;
    let (a, b) = x.split_at(n);
    let (c, d) = y.split_at(n);
    let mut acc = 0;
    for s in 0..n {
        acc = field.add(acc, field.mul(b[s], c[s]));
        #[cfg(not(feature = "mutant-j-sign"))]
        {
            acc = field.sub(acc, field.mul(a[s], d[s]));
        }
        #[cfg(feature = "mutant-j-sign")]
        {
            acc = field.add(acc, field.mul(a[s], d[s]));
        }
    }
    Ok(acc)
}

/// `tr(x J y^T)`, an element of the prime field.
pub fn symp_form(field: &Field, x: &[u32], y: &[u32]) -> Result<u32, SymplecticError> {
    Ok(field.trace(symp_bilinear(field, x, y)?))
}

/// `J` itself, `2n x 2n`.
pub fn j_matrix(field: &Field, n: usize) -> Matrix {
    let mut j = Matrix::zeros(field, 2 * n, 2 * n);
    #[cfg(not(feature = "mutant-j-sign"))]
    let upper = field.neg(1);
    #[cfg(feature = "mutant-j-sign")]
    let upper = 1;
    for s in 0..n {
        j.set(s, n + s, upper);
        j.set(n + s, s, 1);
    }
    j
}

/// Basis of `{w : v J w^T = 0 for all v in V}`.
pub fn symp_dual(v_basis: &Matrix) -> Matrix {
    let f = v_basis.field();
    let n2 = v_basis.cols();
    let n = n2 / 2;
    // v J w^T = 0 for all w  <=>  w in kernel of (V J)
    let mut vj = Matrix::zeros(f, v_basis.rows(), n2);
    for r in 0..v_basis.rows() {
        let row = v_basis.row(r);
        for s in 0..n {
            // (a, b) J = (b, -a) up to the mutant sign
            vj.set(r, s, row[n + s]);
            #[cfg(not(feature = "mutant-j-sign"))]
            vj.set(r, n + s, f.neg(row[s]));
            #[cfg(feature = "mutant-j-sign")]
            vj.set(r, n + s, row[s]);
        }
    }
    vj.kernel()
}

/// All pairwise forms among the rows vanish. The bilinear value is checked,
/// which for an `F_q`-span is equivalent to the trace form vanishing on it.
pub fn is_self_orthogonal(v_basis: &Matrix) -> bool {
    let f = v_basis.field();
    (0..v_basis.rows()).all(|i| {
        (i..v_basis.rows()).all(|j| {
            symp_bilinear(f, v_basis.row(i), v_basis.row(j)) == Ok(0)
        })
    })
}

/// A subspace `V` together with its symplectic dual.
#[derive(Debug, Clone)]
pub struct SymplecticSubspace {
    pub n: usize,
    pub v_basis: Matrix,
    pub vperp_basis: Matrix,
}

impl SymplecticSubspace {
    pub fn new(v_basis: Matrix) -> Self {
        let vperp_basis = symp_dual(&v_basis);
        SymplecticSubspace {
            n: v_basis.cols() / 2,
            v_basis,
            vperp_basis,
        }
    }

    pub fn is_stabilizer(&self) -> bool {
        is_self_orthogonal(&self.v_basis)
    }
}

/// Identifies the coset of `span(G_S)` containing a vector, in coordinates
/// of the representative rows `M`.
#[derive(Debug, Clone)]
pub struct CosetDecoder {
    g_s: Matrix,
    m: Matrix,
    inverse: Matrix,
}

impl CosetDecoder {
    pub fn new(g_s: &Matrix, m: &Matrix) -> Result<Self, SymplecticError> {
        let stacked = g_s.vstack(m)?;
        let dim = stacked.cols();
        if stacked.rows() != dim {
            return Err(SymplecticError::SingularBasis(stacked.rank(), dim));
        }
        let inverse = stacked
            .inverse()
            .map_err(|_| SymplecticError::SingularBasis(stacked.rank(), dim))?;
        Ok(CosetDecoder {
            g_s: g_s.clone(),
            m: m.clone(),
            inverse,
        })
    }

    pub fn g_s(&self) -> &Matrix {
        &self.g_s
    }

    pub fn representatives(&self) -> &Matrix {
        &self.m
    }

    /// The unique `x` with `a ∈ span(G_S) + x M`.
    pub fn decode(&self, a: &[u32]) -> Result<Vec<u32>, SymplecticError> {
        let coeffs = self.inverse.vec_mul(a)?;
        Ok(coeffs[self.g_s.rows()..].to_vec())
    }
}

pub fn coset_decode(a: &[u32], decoder: &CosetDecoder) -> Result<Vec<u32>, SymplecticError> {
    decoder.decode(a)
}
