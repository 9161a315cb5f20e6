//! Complex dense and matrix-free Hermitian linear algebra.
//!
//! Matrices are square, row-major, with `Complex<T>` entries. The dense
//! eigensolver (Householder tridiagonalization + implicit-shift QL) lives in
//! [`eigen`], the matrix-free extremal solver (Lanczos with full
//! reorthogonalization) in [`lanczos`], and the companion-matrix polynomial
//! root finder used by spectrum reconstruction in [`roots`].

mod eigen;
mod lanczos;
mod roots;

pub use eigen::{eig_hermitian, eig_hermitian_full};
pub use lanczos::min_eig_matfree;
pub use roots::{real_roots_monic, RootFindResult};

use num_complex::Complex;

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::Scalar;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Entry count must equal `dim * dim`.
    pub fn new(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::BadEntryCount {
                got: entries.len(),
                expected: dim * dim,
            });
        }
        Ok(ComplexMatrix { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Build from a real diagonal.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex<T>] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn trace(&self) -> Complex<T> {
        let mut t = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            t += self.at(i, i);
        }
        t
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix::new(self.dim, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix::new(self.dim, entries)
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn scaled_real(&self, factor: T) -> Self {
        self.scaled(Complex::new(factor, T::zero()))
    }

    /// Max-norm of the entries.
    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, e| acc.max(e.norm()))
    }

    /// Largest entrywise deviation from the own adjoint.
    pub fn hermiticity_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        dev
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (m, x) in row.iter().zip(v) {
                acc += m * x;
            }
            *o = acc;
        }
    }
}

fn check_same_dim<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

/// Standard matrix product. The i-k-j loop order keeps the inner loop
/// sequential over both operands.
pub fn matmul<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    check_same_dim(a, b)?;
    let d = a.dim;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a.at(i, k);
            if aik.re == T::zero() && aik.im == T::zero() {
                continue;
            }
            let brow = b.row(k);
            let orow = &mut out.entries[i * d..(i + 1) * d];
            for (o, bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Anticommutator {A, B} = AB + BA.
pub fn anticommutator<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let ab = matmul(a, b)?;
    let ba = matmul(b, a)?;
    ab.add(&ba)
}

/// Kronecker product, dimension `a.dim * b.dim`. Errors when the result would
/// exceed the configured dimension cap.
pub fn tensor<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    cfg: &NumericConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let dim = cfg.check_dim(a.dim as u128 * b.dim as u128)?;
    let (da, db) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(dim);
    for ia in 0..da {
        for ja in 0..da {
            let f = a.at(ia, ja);
            for ib in 0..db {
                for jb in 0..db {
                    out.set(ia * db + ib, ja * db + jb, f * b.at(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// n-fold Kronecker power.
pub fn tensor_power<T: Scalar>(
    m: &ComplexMatrix<T>,
    n: u32,
    cfg: &NumericConfig<T>,
) -> Result<ComplexMatrix<T>> {
    if n == 0 {
        return Err(Error::ParamRange {
            name: "n",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut dim: u128 = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(m.dim as u128);
    }
    cfg.check_dim(dim)?;
    let mut out = m.clone();
    for _ in 1..n {
        out = tensor(&out, m, cfg)?;
    }
    Ok(out)
}

/// Matrix whose Hermiticity has been checked on construction.
#[derive(Debug, Clone)]
pub struct HermitianView<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> HermitianView<T> {
    /// Rejects matrices with `||M - M^dagger||_max` above `tol`.
    pub fn new(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(HermitianView { matrix })
    }

    /// Uses the default tolerance (1e-10).
    pub fn new_default(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::new(matrix, NumericConfig::<T>::default().hermiticity_tol)
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }
}

/// PSD decision: true iff the smallest eigenvalue is >= -tol.
pub fn is_psd<T: Scalar>(m: &HermitianView<T>, tol: T) -> Result<bool> {
    let eigs = eig_hermitian(m)?;
    Ok(eigs.first().map_or(true, |&lo| lo >= -tol))
}

/// Lazy tensor product `(factors[0] x ... x factors[k-1])^{x exponent}`;
/// for a plain power the list holds the single repeated factor.
#[derive(Debug, Clone)]
pub struct TensorFactoredOperator<T> {
    factors: Vec<ComplexMatrix<T>>,
    exponent: u32,
}

impl<T: Scalar> TensorFactoredOperator<T> {
    /// `factor^{x exponent}`.
    pub fn power(factor: ComplexMatrix<T>, exponent: u32, cfg: &NumericConfig<T>) -> Result<Self> {
        Self::build(vec![factor], exponent, cfg)
    }

    /// Tensor product of distinct factors.
    pub fn product(factors: Vec<ComplexMatrix<T>>, cfg: &NumericConfig<T>) -> Result<Self> {
        Self::build(factors, 1, cfg)
    }

    fn build(factors: Vec<ComplexMatrix<T>>, exponent: u32, cfg: &NumericConfig<T>) -> Result<Self> {
        if factors.is_empty() || exponent == 0 {
            return Err(Error::ParamRange {
                name: "exponent",
                value: exponent as f64,
                expected: ">= 1 with at least one factor",
            });
        }
        let mut dim: u128 = 1;
        for _ in 0..exponent {
            for f in &factors {
                dim = dim.saturating_mul(f.dim() as u128);
            }
        }
        cfg.check_dim(dim)?;
        Ok(TensorFactoredOperator { factors, exponent })
    }

    pub fn dim(&self) -> usize {
        let mut dim: usize = 1;
        for _ in 0..self.exponent {
            for f in &self.factors {
                dim *= f.dim();
            }
        }
        dim
    }

    /// Factors in application order, repeats expanded.
    pub fn factor_sequence(&self) -> Vec<&ComplexMatrix<T>> {
        let mut seq = Vec::with_capacity(self.factors.len() * self.exponent as usize);
        for _ in 0..self.exponent {
            for f in &self.factors {
                seq.push(f);
            }
        }
        seq
    }

    /// Apply without materializing the product: one pass per tensor axis,
    /// O(dim * d_axis) work each, so O(n * d * dim) for a d-dim factor to the
    /// n-th power.
    pub fn apply(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        let dim = self.dim();
        assert_eq!(v.len(), dim);
        assert_eq!(out.len(), dim);
        let seq = self.factor_sequence();
        out.copy_from_slice(v);
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); dim];
        // Row-major index layout: the first factor owns the slowest index.
        let mut stride = dim;
        for m in &seq {
            let d = m.dim();
            stride /= d;
            apply_on_axis(m, out, &mut scratch, stride);
        }
    }

    /// Materialize densely (subject to the cap).
    pub fn dense(&self, cfg: &NumericConfig<T>) -> Result<ComplexMatrix<T>> {
        let seq = self.factor_sequence();
        let mut out = seq[0].clone();
        for m in &seq[1..] {
            out = tensor(&out, m, cfg)?;
        }
        Ok(out)
    }
}

/// In-place application of a single d-dim factor on the tensor axis whose
/// suffix stride is `stride`.
fn apply_on_axis<T: Scalar>(
    m: &ComplexMatrix<T>,
    v: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
    stride: usize,
) {
    let d = m.dim();
    let block = d * stride;
    let zero = Complex::new(T::zero(), T::zero());
    for base in (0..v.len()).step_by(block) {
        for inner in 0..stride {
            for (i, sc) in scratch.iter_mut().enumerate().take(d) {
                let mut acc = zero;
                for j in 0..d {
                    acc += m.at(i, j) * v[base + j * stride + inner];
                }
                *sc = acc;
            }
            for (i, sc) in scratch.iter().enumerate().take(d) {
                v[base + i * stride + inner] = *sc;
            }
        }
    }
}

/// Inner product `<u, v> = sum conj(u_i) v_i`.
pub(crate) fn dot<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

pub(crate) fn vec_norm<T: Scalar>(v: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for x in v {
        acc += x.norm_sqr();
    }
    acc.sqrt()
}
