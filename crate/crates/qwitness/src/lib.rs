//! Numerical laboratory for an anticommutator-based quantumness witness.
//!
//! The central object is the Hermitian operator
//!
//! ```text
//! J = {rho_X, rho_Z} = rho_X rho_Z + rho_Z rho_X
//! ```
//!
//! built from two density matrices. If a system admits a joint classical
//! description of the two preparations, J is positive semidefinite; a
//! negative eigenvalue of J therefore certifies quantumness. The crate
//! provides:
//!
//! - [`linalg`]: dense and matrix-free complex Hermitian linear algebra
//!   (products, tensor products, eigensolvers, positivity decisions);
//! - [`states`]: density-matrix construction and validation, the one-parameter
//!   mixed qubit families, purity, entropy and the purification budget;
//! - [`witness`]: the plain witness, its n-fold tensor power, the
//!   correlation-enhanced variant built from controlled gate cascades, and the
//!   quantumness verdict;
//! - [`criticality`]: bisection for critical mixedness parameters, sweeps over
//!   n, cubic fits in 1/n and copy-count extrapolation;
//! - [`circuit`]: the SHIFT-operator trace identity, the controlled-SHIFT
//!   Hadamard test with seeded shot sampling, moment vectors and spectrum
//!   reconstruction from power sums.
//!
//! Everything is generic over the floating-point scalar through [`Scalar`];
//! `f64` aliases for the main types live at the crate root.

pub mod circuit;
pub mod config;
pub mod criticality;
pub mod error;
pub mod linalg;
pub mod states;
pub mod witness;

use core::fmt;
use core::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub use config::NumericConfig;
pub use error::{Error, Result};

/// Floating-point scalar the crate is generic over. Implemented for `f32` and
/// `f64`; all tolerances in [`NumericConfig`] default to values appropriate
/// for `f64` and should be loosened for `f32` work.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion of an `f64` constant into the scalar type.
    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("float constant must be representable")
    }

    /// Lossy view of the scalar as `f64`, for diagnostics and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex entry types.
pub type C32 = num_complex::Complex<f32>;
pub type C64 = num_complex::Complex<f64>;

/// Double-precision aliases for the main domain types.
pub type Matrix64 = linalg::ComplexMatrix<f64>;
pub type DensityMatrix64 = states::DensityMatrix<f64>;
pub type Witness64 = witness::WitnessOperator<f64>;
pub type Verdict64 = witness::QuantumnessVerdict<f64>;
pub type SweepRecord64 = criticality::SweepRecord<f64>;
pub type FitResult64 = criticality::FitResult<f64>;

/// Single-precision aliases.
pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type DensityMatrix32 = states::DensityMatrix<f32>;
pub type Witness32 = witness::WitnessOperator<f32>;
