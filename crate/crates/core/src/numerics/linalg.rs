//! Small dense complex vectors and Hermitian operators.
//!
//! Operators are stored row-major and never exceed 8x8 in this crate, so
//! everything here favours simple loops over blocked kernels.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Largest dimension accepted by [`eigh`].
pub const MAX_DIM: usize = 8;

/// Relative tolerance of the Hermiticity invariant.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVector {
    entries: Vec<C64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![C64::new(0.0, 0.0); dim] }
    }

    /// Unit vector `e_k` (zero-based `k`).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product of mismatched dimensions");
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scale(&mut self, s: C64) {
        self.entries.iter_mut().for_each(|z| *z *= s);
    }

    pub fn distance(&self, other: &ComplexVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.entries[k]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.entries[k]
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(entries: Vec<C64>) -> Self {
        Self::new(entries)
    }
}

/// Dense Hermitian matrix.
///
/// The safe constructors and mutators keep `H[i][j] == conj(H[j][i])`; the
/// only way to break it is [`HermitianOperator::from_row_major_unchecked`].
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut h = Self::zeros(dim);
        for k in 0..dim {
            h.set_diagonal(k, 1.0);
        }
        h
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut h = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            h.set_diagonal(k, d);
        }
        h
    }

    /// Validating constructor from row-major entries.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self, NumericsError> {
        let h = Self::from_row_major_unchecked(dim, entries);
        h.check_hermitian()?;
        Ok(h)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumericsError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(NumericsError::NotSquare { rows: dim });
        }
        Self::from_row_major(dim, rows.iter().flatten().copied().collect())
    }

    /// Builds an operator without checking Hermiticity. Consumers such as
    /// [`eigh`] re-validate, so this exists for importing foreign data and for
    /// exercising those checks.
    pub fn from_row_major_unchecked(dim: usize, entries: Vec<C64>) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count does not match dimension");
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn as_row_major(&self) -> &[C64] {
        &self.entries
    }

    /// Sets `H[i][j] = v` and `H[j][i] = conj(v)`. On the diagonal only the
    /// real part of `v` is kept.
    #[inline]
    pub fn set_coupling(&mut self, i: usize, j: usize, v: C64) {
        if i == j {
            self.entries[i * self.dim + i] = C64::new(v.re, 0.0);
        } else {
            self.entries[i * self.dim + j] = v;
            self.entries[j * self.dim + i] = v.conj();
        }
    }

    #[inline]
    pub fn set_diagonal(&mut self, i: usize, x: f64) {
        self.entries[i * self.dim + i] = C64::new(x, 0.0);
    }

    pub fn fill_zero(&mut self) {
        self.entries.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    }

    pub fn add_assign(&mut self, other: &HermitianOperator) {
        assert_eq!(self.dim, other.dim, "adding operators of mismatched dimensions");
        self.entries.iter_mut().zip(&other.entries).for_each(|(a, b)| *a += b);
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim, other.dim, "subtracting operators of mismatched dimensions");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scaled(&self, s: f64) -> HermitianOperator {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// `max |H[i][j] - conj(H[j][i])|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<(), NumericsError> {
        let scale = self.max_abs();
        let tol = HERMITICITY_TOL * scale;
        for i in 0..self.dim {
            for j in i..self.dim {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(NumericsError::NonFinite { context: format!("entry ({i},{j})") });
                }
                let dev = (a - b.conj()).norm();
                if dev > tol {
                    return Err(NumericsError::NotHermitian { row: i, col: j, deviation: dev, scale });
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `out = H x`.
    #[inline]
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * n..(i + 1) * n];
            *o = row.iter().zip(x).map(|(h, v)| h * v).sum();
        }
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        self.apply_into(x.as_slice(), out.as_mut_slice());
        out
    }

    /// `<a|H|b>`.
    pub fn matrix_element(&self, a: &ComplexVector, b: &ComplexVector) -> C64 {
        a.inner(&self.apply(b))
    }

    /// Copies the upper-left `dim x dim` block.
    pub fn block(&self, dim: usize) -> HermitianOperator {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.entries[i * dim + j] = self.get(i, j);
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianOperator({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ComplexVector>,
}

impl EigenDecomposition {
    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let n = self.eigenvalues.len();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += *lam * v[i] * v[j].conj();
                }
            }
        }
        HermitianOperator::from_row_major_unchecked(n, entries)
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.eigenvectors.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                let dev = (self.eigenvectors[a].inner(&self.eigenvectors[b]) - target).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// Hermitian eigendecomposition.
///
/// Eigenvalues come back ascending (stable order for ties). Each eigenvector
/// is rotated so that its largest-magnitude component (lowest index among
/// near-ties) is real and nonnegative.
pub fn eigh(h: &HermitianOperator) -> Result<EigenDecomposition, NumericsError> {
    let n = h.dim();
    if n == 0 || n > MAX_DIM {
        return Err(NumericsError::UnsupportedDimension { dim: n, max: MAX_DIM });
    }
    h.check_hermitian()?;

    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for k in order {
        eigenvalues.push(eig.eigenvalues[k]);
        let mut v = ComplexVector::new(eig.eigenvectors.column(k).iter().copied().collect());
        fix_phase(&mut v);
        eigenvectors.push(v);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

fn fix_phase(v: &mut ComplexVector) {
    let biggest = v.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if biggest == 0.0 {
        return;
    }
    // near-ties resolve to the lowest index so the choice is reproducible
    let pivot = v
        .as_slice()
        .iter()
        .position(|z| z.norm() >= biggest * (1.0 - 1e-12))
        .unwrap_or(0);
    let z = v[pivot];
    let phase = z.conj() / z.norm();
    v.scale(phase);
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
}
