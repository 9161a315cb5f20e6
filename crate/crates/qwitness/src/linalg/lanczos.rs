//! Matrix-free smallest eigenvalue via Lanczos iteration.
//!
//! Full reorthogonalization keeps the Krylov basis orthonormal, so running to
//! `k = dim` steps degenerates gracefully into an exact solve of the
//! projected problem. The operator is only accessed through its action; a
//! stochastic probe rejects callbacks that are not Hermitian.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eigen::eig_sym_tridiagonal;
use super::{dot, vec_norm};
use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::Scalar;

/// Smallest eigenvalue of a Hermitian operator given by its action.
///
/// The callback must write `A v` into its second argument. Convergence is
/// declared when the Ritz residual bound drops below `cfg.lanczos_tol`
/// (scaled by the spectral magnitude); hitting `dim` iterations is an exact
/// solve and always terminates.
pub fn min_eig_matfree<T, F>(apply: F, dim: usize, cfg: &NumericConfig<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(&[Complex<T>], &mut [Complex<T>]),
{
    if dim == 0 {
        return Err(Error::ParamRange {
            name: "dim",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.probe_seed);
    probe_hermitian(&apply, dim, cfg, &mut rng)?;

    let zero = Complex::new(T::zero(), T::zero());
    let max_iter = cfg.lanczos_max_iter.min(dim).max(1);

    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(max_iter);
    let mut alphas: Vec<T> = Vec::with_capacity(max_iter);
    let mut betas: Vec<T> = Vec::with_capacity(max_iter);

    let q0 = random_unit(&mut rng, dim);
    basis.push(q0);
    let mut w = vec![zero; dim];

    for k in 0..max_iter {
        apply(&basis[k], &mut w);
        let alpha = dot(&basis[k], &w).re;
        alphas.push(alpha);

        // w <- w - alpha q_k - beta_{k-1} q_{k-1}, then full reorth (twice).
        for (wi, qi) in w.iter_mut().zip(&basis[k]) {
            *wi -= qi * Complex::new(alpha, T::zero());
        }
        if k > 0 {
            let beta_prev = betas[k - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= qi * Complex::new(beta_prev, T::zero());
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let coef = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= qi * coef;
                }
            }
        }
        let beta = vec_norm(&w);

        // Convergence check on the projected problem.
        let (vals, vecs) =
            eig_sym_tridiagonal(alphas.clone(), betas.clone(), true, cfg.ql_max_sweeps)?;
        let steps = alphas.len();
        let theta_min = vals[0];
        let scale = vals[steps - 1].abs().max(theta_min.abs()).max(T::one());
        let last_component = vecs.as_ref().map_or(T::one(), |z| z[(steps - 1) * steps]);
        let residual = beta * last_component.abs();
        if residual <= cfg.lanczos_tol * scale || steps == dim {
            return Ok(theta_min);
        }

        if k + 1 == max_iter {
            break;
        }
        betas.push(beta);
        let next = if beta > T::epsilon() * scale {
            let inv = T::one() / beta;
            w.iter().map(|x| x * Complex::new(inv, T::zero())).collect()
        } else {
            // Breakdown: the Krylov space is invariant. Continue in a fresh
            // random direction orthogonal to everything found so far.
            *betas.last_mut().expect("just pushed") = T::zero();
            match random_orthogonal(&mut rng, &basis, dim) {
                Some(v) => v,
                None => return Ok(theta_min),
            }
        };
        basis.push(next);
    }

    Err(Error::NonConvergence {
        iterations: max_iter,
    })
}

fn probe_hermitian<T, F>(
    apply: &F,
    dim: usize,
    cfg: &NumericConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<()>
where
    T: Scalar,
    F: Fn(&[Complex<T>], &mut [Complex<T>]),
{
    let zero = Complex::new(T::zero(), T::zero());
    for _ in 0..cfg.probe_count {
        let u = random_unit(rng, dim);
        let v = random_unit(rng, dim);
        let mut au = vec![zero; dim];
        let mut av = vec![zero; dim];
        apply(&u, &mut au);
        apply(&v, &mut av);
        let lhs = dot(&u, &av);
        let rhs = dot(&v, &au).conj();
        let deviation = (lhs - rhs).norm();
        let scale = vec_norm(&au) + vec_norm(&av) + T::one();
        if deviation > cfg.probe_tol * scale {
            return Err(Error::NonHermitianAction {
                deviation: deviation.as_f64(),
            });
        }
    }
    Ok(())
}

fn random_unit<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                Complex::new(
                    T::from_f64c(rng.gen::<f64>() - 0.5),
                    T::from_f64c(rng.gen::<f64>() - 0.5),
                )
            })
            .collect();
        let norm = vec_norm(&v);
        if norm > T::from_f64c(1e-3) {
            let inv = T::one() / norm;
            return v
                .iter()
                .map(|x| x * Complex::new(inv, T::zero()))
                .collect();
        }
    }
}

fn random_orthogonal<T: Scalar>(
    rng: &mut ChaCha8Rng,
    basis: &[Vec<Complex<T>>],
    dim: usize,
) -> Option<Vec<Complex<T>>> {
    for _ in 0..8 {
        let mut v = random_unit::<T>(rng, dim);
        for _ in 0..2 {
            for q in basis {
                let coef = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= qi * coef;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm > T::from_f64c(1e-6) {
            let inv = T::one() / norm;
            return Some(
                v.iter()
                    .map(|x| x * Complex::new(inv, T::zero()))
                    .collect(),
            );
        }
    }
    None
}
