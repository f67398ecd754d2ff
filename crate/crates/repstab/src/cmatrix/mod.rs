//! Dense complex linear algebra kernel.
//!
//! Everything in the crate works on row-major [`CMatrix`] values. The kernel
//! deliberately stays small: Jacobi decompositions in [`decomp`], singular
//! value functionals in [`norms`], and the block surgeries (Kronecker
//! products, partial traces, column stacking) that the Fourier and inverse
//! pipelines are built from.

pub mod decomp;
pub mod norms;

pub use decomp::{
    complete_orthonormal_columns, herm_eig, polar_partial_unitary, svd, unitary_completion,
    SvdResult,
};
pub use norms::{
    box_norm4, is_partial_unitary, normalized_p_dist, nuclear_norm, nuclear_op_duality_check,
    op_norm, schatten_norm, soft_threshold_split,
};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self.at(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a row-major entry vector, rejecting non-finite values.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::BadParameter("matrix entries must be finite".into()));
        }
        Ok(CMatrix { rows, cols, entries })
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        CMatrix::diag(&values.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = k * other.cols;
                let orow = i * other.cols;
                for j in 0..other.cols {
                    out.entries[orow + j] += a * other.entries[row + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape(), "matrix difference shape mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> CMatrix {
        let entries = self.entries.iter().map(|a| a * s).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> CMatrix {
        let entries = self.entries.iter().map(|a| a.conj()).collect();
        CMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    /// Normalized trace tr(A)/n.
    pub fn trace_normalized(&self) -> Complex64 {
        self.trace() / self.rows as f64
    }

    pub fn hs_norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// Matrix inner product tr(A B*).
    pub fn hs_inner(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.shape(), other.shape(), "inner product shape mismatch");
        self.entries.iter().zip(&other.entries).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product; entry ((i,r),(j,s)) = A_ij * B_rs with row-major
    /// pair indexing (i, r) -> i*B.rows + r.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (ra, ca) = self.shape();
        let (rb, cb) = other.shape();
        let mut out = CMatrix::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self.at(i, j);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for r in 0..rb {
                    let orow = (i * rb + r) * out.cols + j * cb;
                    let brow = r * cb;
                    for s in 0..cb {
                        out.entries[orow + s] = a * other.entries[brow + s];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal direct sum A ⊕ B.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// Horizontal concatenation (B1 | B2 | ...). All blocks must share the row count.
    pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack row mismatch");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.set_block(0, at, b);
            at += b.cols;
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> CMatrix {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        CMatrix::from_fn(h, w, |i, j| self.at(r0 + i, c0 + j))
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.at(i, j));
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Reinterprets a length r*c vector as an r x c matrix, row-major.
    pub fn from_vec_rowmajor(rows: usize, cols: usize, v: &[Complex64]) -> CMatrix {
        assert_eq!(v.len(), rows * cols);
        CMatrix { rows, cols, entries: v.to_vec() }
    }

    /// Flattens row-major into a vector of length rows*cols.
    pub fn to_vec_rowmajor(&self) -> Vec<Complex64> {
        self.entries.clone()
    }

    pub fn random_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(gauss(rng), gauss(rng))
        })
    }

    /// Random Hermitian matrix from a complex Gaussian ensemble.
    pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
        let a = CMatrix::random_gaussian(rng, n, n);
        a.add(&a.adjoint()).scale(0.5)
    }

    /// Haar-ish random unitary built by Gram-Schmidt on a Gaussian matrix.
    /// Independent of the SVD kernel, which makes it usable as a test oracle.
    pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
        loop {
            let a = CMatrix::random_gaussian(rng, n, n);
            if let Some(q) = gram_schmidt_columns(&a) {
                return q;
            }
        }
    }
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > 1e-300 {
            let v: f64 = rng.gen::<f64>();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// Orthonormalizes the columns; None if numerically rank-deficient.
fn gram_schmidt_columns(a: &CMatrix) -> Option<CMatrix> {
    let (n, k) = a.shape();
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|j| a.column(j)).collect();
    for j in 0..k {
        for _ in 0..2 {
            // re-orthogonalize once for stability
            for p in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let prev = &head[p];
                let cur = &mut tail[0];
                let proj: Complex64 = prev.iter().zip(cur.iter()).map(|(u, v)| u.conj() * v).sum();
                for (dst, u) in cur.iter_mut().zip(prev.iter()) {
                    *dst -= proj * u;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    Some(CMatrix::from_fn(n, k, |i, j| cols[j][i]))
}

/// Computes (I_n ⊗ R) · M: each d x d block row of M is multiplied by R on
/// the left, where M is (n·d) x (n·d) and R is d x d.
pub fn block_scalar_mul(r: &CMatrix, m: &CMatrix) -> Result<CMatrix> {
    if !r.is_square() || !m.is_square() {
        return Err(Error::ShapeMismatch("block_scalar_mul needs square inputs".into()));
    }
    let d = r.rows();
    if d == 0 || !m.rows().is_multiple_of(d) {
        return Err(Error::ShapeMismatch(format!(
            "matrix of size {} is not a multiple of block size {d}",
            m.rows()
        )));
    }
    let n = m.rows() / d;
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for bi in 0..n {
        for bj in 0..n {
            let block = m.block(bi * d, bj * d, d, d);
            out.set_block(bi * d, bj * d, &r.mul(&block));
        }
    }
    Ok(out)
}

/// Partial trace over the second factor: maps each d x d block of an
/// (n·d) x (n·d) matrix to its trace, producing an n x n matrix.
pub fn partial_trace_blocks(m: &CMatrix, n: usize, d: usize) -> Result<CMatrix> {
    if m.rows() != n * d || m.cols() != n * d {
        return Err(Error::ShapeMismatch(format!(
            "partial trace expects {n}·{d} square input, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut t = Complex64::new(0.0, 0.0);
            for k in 0..d {
                t += m.at(i * d + k, j * d + k);
            }
            out.set(i, j, t);
        }
    }
    Ok(out)
}

/// JSON wire form: rows, cols, entries as [re, im] pairs.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<CMatrix> {
        let entries = j.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        CMatrix::from_entries(j.rows, j.cols, entries)
    }
}
