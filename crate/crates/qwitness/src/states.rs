//! Density matrices and the mixed qubit family.
//!
//! The family interpolates between the maximally mixed state and a pure
//! state along one of two axes:
//!
//! ```text
//! rho_X = (1-p)/2 I + p |+><+|        rho_Z = (1-p)/2 I + p |0><0|
//! ```
//!
//! `p` is the Bloch-vector length, so purity is (1 + p^2)/2. Entropy is
//! measured in bits throughout; the purification budget `m = floor(n (1 - S))`
//! counts how many pure qubits algorithmic cooling can distill from `n`
//! copies.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, min_eig_matfree, ComplexMatrix, HermitianView};
use crate::Scalar;

/// Which pure state anchors the mixed family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyAxis {
    /// Anchored at |+><+|; off-diagonal family.
    X,
    /// Anchored at |0><0|; diagonal family.
    Z,
}

impl std::fmt::Display for FamilyAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyAxis::X => write!(f, "x"),
            FamilyAxis::Z => write!(f, "z"),
        }
    }
}

/// Validated parameters for [`mixed_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedFamilyParams<T> {
    p: T,
    axis: FamilyAxis,
}

impl<T: Scalar> MixedFamilyParams<T> {
    /// Requires `0 <= p <= 1`.
    pub fn new(p: T, axis: FamilyAxis) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::ParamRange {
                name: "p",
                value: p.as_f64(),
                expected: "0 <= p <= 1",
            });
        }
        Ok(MixedFamilyParams { p, axis })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn axis(&self) -> FamilyAxis {
        self.axis
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// All three invariants are enforced on [`DensityMatrix::new`]; internal
/// constructors that guarantee them structurally skip the eigensolve.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace, and positivity (smallest eigenvalue
    /// above `-psd_tol`). Dense eigensolve below the crossover dimension,
    /// matrix-free above it.
    pub fn new(matrix: ComplexMatrix<T>, cfg: &NumericConfig<T>) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > cfg.hermiticity_tol {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
                tol: cfg.hermiticity_tol.as_f64(),
            });
        }
        let tr = matrix.trace();
        let tr_dev = ((tr.re - T::one()).abs()).max(tr.im.abs());
        if tr_dev > cfg.hermiticity_tol {
            return Err(Error::InvalidDensity {
                reason: format!("trace deviates from 1 by {}", tr_dev.as_f64()),
            });
        }
        let min = if matrix.dim() <= cfg.dense_crossover {
            let view = HermitianView::new(matrix.clone(), cfg.hermiticity_tol)?;
            eig_hermitian(&view)?[0]
        } else {
            min_eig_matfree(|v, out| matrix.apply(v, out), matrix.dim(), cfg)?
        };
        if min < -cfg.psd_tol {
            return Err(Error::InvalidDensity {
                reason: format!("smallest eigenvalue {} is negative", min.as_f64()),
            });
        }
        Ok(DensityMatrix { matrix })
    }

    /// For outputs whose validity is structural (projectors, convex mixes of
    /// valid states, unitary conjugations). Not exposed outside the crate.
    pub(crate) fn trusted(matrix: ComplexMatrix<T>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// Bloch components (r_x, r_y, r_z) of a qubit state.
    pub fn bloch_vector(&self) -> Result<[T; 3]> {
        if self.dim() != 2 {
            return Err(Error::Unsupported(
                "Bloch vector is defined for qubits only",
            ));
        }
        let two = T::from_f64c(2.0);
        let off = self.matrix.at(0, 1);
        Ok([
            two * off.re,
            -two * off.im,
            self.matrix.at(0, 0).re - self.matrix.at(1, 1).re,
        ])
    }
}

/// Normalized rank-1 projector |psi><psi| from unnormalized amplitudes.
pub fn pure_state<T: Scalar>(
    amplitudes: &[Complex<T>],
    cfg: &NumericConfig<T>,
) -> Result<DensityMatrix<T>> {
    let dim = cfg.check_dim(amplitudes.len() as u128)?;
    if dim == 0 {
        return Err(Error::ZeroVector);
    }
    let norm_sq: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let norm = norm_sq.sqrt();
    if norm <= T::zero() || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let inv = T::one() / norm;
    let psi: Vec<Complex<T>> = amplitudes
        .iter()
        .map(|a| a * Complex::new(inv, T::zero()))
        .collect();
    let mut m = ComplexMatrix::zeros(dim);
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            m.set(i, j, a * b.conj());
        }
    }
    Ok(DensityMatrix::trusted(m))
}

/// The mixed qubit family `(1-p)/2 I + p |anchor><anchor|`.
///
/// Entries are written in closed form, so p = 0 and p = 1 are exact.
pub fn mixed_family<T: Scalar>(params: MixedFamilyParams<T>) -> DensityMatrix<T> {
    let half = T::from_f64c(0.5);
    let p = params.p;
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = ComplexMatrix::zeros(2);
    match params.axis {
        FamilyAxis::X => {
            let off = Complex::new(half * p, T::zero());
            m.set(0, 0, Complex::new(half, T::zero()));
            m.set(1, 1, Complex::new(half, T::zero()));
            m.set(0, 1, off);
            m.set(1, 0, off);
        }
        FamilyAxis::Z => {
            m.set(0, 0, Complex::new(half * (T::one() + p), T::zero()));
            m.set(1, 1, Complex::new(half * (T::one() - p), T::zero()));
            m.set(0, 1, zero);
            m.set(1, 0, zero);
        }
    }
    DensityMatrix::trusted(m)
}

/// Both family members at the same mixedness: `(rho_X, rho_Z)`.
pub fn mixed_pair<T: Scalar>(p: T) -> Result<(DensityMatrix<T>, DensityMatrix<T>)> {
    let x = mixed_family(MixedFamilyParams::new(p, FamilyAxis::X)?);
    let z = mixed_family(MixedFamilyParams::new(p, FamilyAxis::Z)?);
    Ok((x, z))
}

/// tr[rho^2], computed as the squared Frobenius norm of a Hermitian matrix.
pub fn purity<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    rho.matrix()
        .entries()
        .iter()
        .map(|e| e.norm_sqr())
        .sum()
}

/// Von Neumann entropy in bits: `-sum lambda log2 lambda`, with
/// `0 log 0 := 0`. Tiny negative eigenvalues from rounding are clamped.
pub fn von_neumann_entropy<T: Scalar>(rho: &DensityMatrix<T>) -> Result<T> {
    let view = HermitianView::new(rho.matrix().clone(), T::from_f64c(1e-8))?;
    let eigs = eig_hermitian(&view)?;
    let mut s = T::zero();
    for lambda in eigs {
        if lambda > T::zero() {
            s -= lambda * lambda.log2();
        }
    }
    Ok(s.max(T::zero()))
}

/// Pure qubits extractable from `n` copies: `m = floor(n (1 - S(rho)))`,
/// clamped to `[0, n]`. Entropy below 1e-12 bits is treated as exactly zero
/// so pure inputs return `n` without floating-point loss.
pub fn purification_budget<T: Scalar>(n: u128, rho: &DensityMatrix<T>) -> Result<u128> {
    let s = von_neumann_entropy(rho)?.as_f64();
    if s <= 1e-12 {
        return Ok(n);
    }
    if s >= 1.0 {
        return Ok(0);
    }
    let raw = (n as f64) * (1.0 - s);
    if raw <= 0.0 {
        return Ok(0);
    }
    let floored = raw.floor();
    if floored >= n as f64 {
        return Ok(n);
    }
    Ok(floored as u128)
}
