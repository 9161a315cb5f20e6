//! Numeric knobs shared across modules.

use crate::error::{Error, Result};
use crate::Scalar;

/// Tolerances and resource limits. The defaults are the documented contract
/// for `f64`; every knob can be overridden per call site.
#[derive(Debug, Clone)]
pub struct NumericConfig<T> {
    /// Hard cap on any materialized or virtual operator dimension.
    pub dim_cap: usize,
    /// Dense eigensolver is used for dims up to this; the matrix-free extremal
    /// solver above it.
    pub dense_crossover: usize,
    /// Max allowed entrywise deviation from M = M^dagger.
    pub hermiticity_tol: T,
    /// A Hermitian operator counts as PSD when its smallest eigenvalue is
    /// >= -psd_tol.
    pub psd_tol: T,
    /// Relative tolerance for the stochastic Hermiticity probe of matrix-free
    /// actions.
    pub probe_tol: T,
    /// Number of random probe pairs for the Hermiticity check.
    pub probe_count: usize,
    /// Seed for probe vectors and the Lanczos start vector; fixed so results
    /// are reproducible run to run.
    pub probe_seed: u64,
    /// Iteration cap for the Lanczos solver (also capped at the dimension).
    pub lanczos_max_iter: usize,
    /// Residual threshold at which a Lanczos Ritz value is accepted.
    pub lanczos_tol: T,
    /// QL sweeps allowed per eigenvalue before giving up.
    pub ql_max_sweeps: usize,
}

impl<T: Scalar> Default for NumericConfig<T> {
    fn default() -> Self {
        NumericConfig {
            dim_cap: 1 << 14,
            dense_crossover: 1024,
            hermiticity_tol: T::from_f64c(1e-10),
            psd_tol: T::from_f64c(1e-9),
            probe_tol: T::from_f64c(1e-8),
            probe_count: 3,
            probe_seed: 0x71C4_D335_9A5F_0B21,
            lanczos_max_iter: 400,
            lanczos_tol: T::from_f64c(1e-10),
            ql_max_sweeps: 30,
        }
    }
}

impl<T: Scalar> NumericConfig<T> {
    /// Check a (possibly huge) dimension against the cap.
    pub fn check_dim(&self, dim: u128) -> Result<usize> {
        if dim == 0 {
            return Err(Error::ParamRange {
                name: "dim",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if dim > self.dim_cap as u128 {
            return Err(Error::DimensionCap {
                dim,
                cap: self.dim_cap,
            });
        }
        Ok(dim as usize)
    }
}
