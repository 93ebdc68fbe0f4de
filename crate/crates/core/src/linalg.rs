//! Dense complex matrix kernel.
//!
//! Everything above this module works with [`ComplexMatrix`] and
//! [`HermitianMatrix`]; nalgebra does the storage and the Hermitian
//! eigensolver. All stated tolerances use the max-abs-entry norm.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hilbert-space dimension cap for tensor products.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Construction tolerance for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::shape("matrix dimensions must be positive"));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { inner })
    }

    /// Wraps a matrix produced by internal arithmetic on finite inputs.
    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_inner(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_inner(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self::from_inner(m)
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_inner(DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj()))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_inner(self.inner.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_inner(&self.inner * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.inner.diagonal().iter().copied().sum()
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Max absolute entry of the difference; `f64::INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.inner.shape() != other.inner.shape() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Max absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self::from_inner(&self.inner * &rhs.inner))
    }

    /// `self * v` for a column vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols(), v.len(), "vector length mismatch");
        let mut out = vec![C64::default(); self.rows()];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::default();
            for (j, x) in v.iter().enumerate() {
                acc += self.inner[(i, j)] * x;
            }
            *o = acc;
        }
        out
    }

    /// ⟨v|self|v⟩.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let w = self.apply(v);
        v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.inner.shape() != other.inner.shape() {
            return Err(Error::shape(format!(
                "{:?} vs {:?}",
                self.inner.shape(),
                other.inner.shape()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_inner(&self.inner + &other.inner))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_inner(&self.inner - &other.inner))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Columns are the orthonormal eigenvectors matching `values`.
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    /// Groups eigenvalue indices into blocks whose consecutive values differ
    /// by at most `tol`.
    pub fn degenerate_blocks(&self, tol: f64) -> Vec<Vec<usize>> {
        group_close(&self.values, tol)
    }
}

/// Indices of `values` grouped into clusters of chained near-equal entries.
pub(crate) fn group_close(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for idx in order {
        match blocks.last_mut() {
            Some(block) if values[idx] - last <= tol => block.push(idx),
            _ => blocks.push(vec![idx]),
        }
        last = values[idx];
    }
    for block in &mut blocks {
        block.sort_unstable();
    }
    blocks
}

/// Square complex matrix equal to its adjoint.
///
/// The stored form is exactly `(M + M†)/2`, so diagonal entries are real and
/// `H[i][j] == conj(H[j][i])` bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    matrix: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::shape(format!(
                "Hermitian matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Symmetrizes without checking the defect; for internal arithmetic whose
    /// result is Hermitian up to rounding.
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let n = matrix.rows();
        let m = matrix.as_dmatrix();
        let inner = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c64(m[(i, i)].re, 0.0)
            } else if i < j {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            } else {
                (m[(j, i)] + m[(i, j)].conj()).conj() * 0.5
            }
        });
        Self {
            matrix: ComplexMatrix::from_inner(inner),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c64(x, 0.0)).collect();
        Self {
            matrix: ComplexMatrix::from_diagonal(&d),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// Projector |v⟩⟨v| (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(v, v))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self::symmetrized(self.matrix.try_add(&other.matrix)?))
    }

    /// Real linear combination `Σ c_k H_k`.
    pub fn linear_combination(terms: &[(f64, &HermitianMatrix)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::domain("empty linear combination"))?;
        let dim = first.dim();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for (c, h) in terms {
            if h.dim() != dim {
                return Err(Error::shape(format!("dimension {} vs {dim}", h.dim())));
            }
            acc += h.matrix.as_dmatrix() * c64(*c, 0.0);
        }
        Ok(Self::symmetrized(ComplexMatrix::from_inner(acc)))
    }

    /// Hermitian eigendecomposition, eigenvalues sorted ascending.
    pub fn eigh(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.matrix.as_dmatrix().clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Spectrum {
            values,
            vectors: ComplexMatrix::from_inner(vectors),
        }
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.as_dmatrix().clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// U = exp(−iHt) via the spectral decomposition of `h`.
pub fn unitary_from_generator(h: &HermitianMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::domain("evolution time must be finite"));
    }
    Ok(unitary_from_spectrum(&h.eigh(), t))
}

/// U = V exp(−iΛt) V† for a precomputed spectrum.
pub fn unitary_from_spectrum(spectrum: &Spectrum, t: f64) -> ComplexMatrix {
    let v = spectrum.vectors.as_dmatrix();
    let n = v.nrows();
    let phases: Vec<C64> = spectrum
        .values
        .iter()
        .map(|&e| C64::from_polar(1.0, -e * t))
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * phases[j]);
    ComplexMatrix::from_inner(scaled * v.adjoint())
}

/// Kronecker product with the default dimension cap.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_product_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_product_with_cap(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cap: usize,
) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => {
            Ok(ComplexMatrix::from_inner(a.as_dmatrix().kronecker(b.as_dmatrix())))
        }
        (r, c) => Err(Error::Capacity {
            requested: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
            cap,
        }),
    }
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::domain("empty tensor product"))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, f| tensor_product(&acc, f))
}

/// Reduced operator on subsystem `keep` of a square matrix over `dims`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: usize) -> Result<ComplexMatrix> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::shape("subsystem dimensions must be positive"));
    }
    if keep >= dims.len() {
        return Err(Error::shape(format!(
            "keep index {keep} out of range for {} subsystems",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::shape(format!(
            "matrix {}x{} does not match subsystem dimensions {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    // View the index as (outer, kept, inner) with strides.
    let d_keep = dims[keep];
    let outer: usize = dims[..keep].iter().product();
    let inner: usize = dims[keep + 1..].iter().product();
    let src = m.as_dmatrix();
    let out = DMatrix::from_fn(d_keep, d_keep, |a, b| {
        let mut acc = C64::default();
        for o in 0..outer {
            for n in 0..inner {
                let r = (o * d_keep + a) * inner + n;
                let c = (o * d_keep + b) * inner + n;
                acc += src[(r, c)];
            }
        }
        acc
    });
    Ok(ComplexMatrix::from_inner(out))
}

/// ‖AB − BA‖ in the max-abs-entry norm.
pub fn commutator_norm(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    matrix_commutator_norm(a.matrix(), b.matrix())
}

pub fn matrix_commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() || a.rows() != b.rows() || b.rows() != b.cols() {
        return Err(Error::shape(format!(
            "commutator of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let ab = a.as_dmatrix() * b.as_dmatrix();
    let ba = b.as_dmatrix() * a.as_dmatrix();
    Ok(ab
        .iter()
        .zip(ba.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm())))
}

/// Single-qubit Pauli operators, with σz|0⟩ = +|0⟩.
pub mod pauli {
    use super::{c64, ComplexMatrix, HermitianMatrix};

    pub fn x() -> HermitianMatrix {
        HermitianMatrix::symmetrized(
            ComplexMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
        )
    }

    pub fn y() -> HermitianMatrix {
        HermitianMatrix::symmetrized(
            ComplexMatrix::from_row_major(
                2,
                2,
                vec![c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
            )
            .unwrap(),
        )
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// σ₊ = |0⟩⟨1| (raises σz from −1 to +1).
    pub fn raising() -> ComplexMatrix {
        ComplexMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    /// σ₋ = |1⟩⟨0|.
    pub fn lowering() -> ComplexMatrix {
        ComplexMatrix::from_real_row_major(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
    }
}
