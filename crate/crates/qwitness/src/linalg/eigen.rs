//! Dense Hermitian eigensolver.
//!
//! Two stages: complex Householder reduction to a real symmetric tridiagonal
//! matrix (with a diagonal phase similarity absorbing the complex subdiagonal
//! phases), then implicit-shift QL iteration. Eigenvectors, when requested,
//! are accumulated through both stages.

use num_complex::Complex;

use super::{ComplexMatrix, HermitianView};
use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::Scalar;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eig_hermitian<T: Scalar>(h: &HermitianView<T>) -> Result<Vec<T>> {
    let cfg = NumericConfig::<T>::default();
    eig_hermitian_impl(h, false, cfg.ql_max_sweeps).map(|(vals, _)| vals)
}

/// Eigenvalues (ascending) with a unitary matrix of eigenvectors as columns:
/// `M = V diag(vals) V^dagger`.
pub fn eig_hermitian_full<T: Scalar>(
    h: &HermitianView<T>,
) -> Result<(Vec<T>, ComplexMatrix<T>)> {
    let cfg = NumericConfig::<T>::default();
    let (vals, vecs) = eig_hermitian_impl(h, true, cfg.ql_max_sweeps)?;
    Ok((vals, vecs.expect("vectors requested")))
}

fn eig_hermitian_impl<T: Scalar>(
    h: &HermitianView<T>,
    want_vectors: bool,
    max_sweeps: usize,
) -> Result<(Vec<T>, Option<ComplexMatrix<T>>)> {
    let d = h.dim();
    if d == 0 {
        return Ok((vec![], want_vectors.then(|| ComplexMatrix::zeros(0))));
    }
    let tri = tridiagonalize(h.matrix(), want_vectors);
    let mut diag = tri.diag;
    let mut off = tri.off;
    off.push(T::zero());
    let mut q = tri.q;

    tqli(&mut diag, &mut off, max_sweeps, |i, c, s| {
        if let Some(q) = q.as_mut() {
            rotate_complex_columns(q, i, c, s);
        }
    })?;

    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).expect("real eigenvalues"));
    let vals: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vecs = q.map(|q| {
        let mut sorted = ComplexMatrix::zeros(d);
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..d {
                sorted.set(row, new_col, q.at(row, old_col));
            }
        }
        sorted
    });
    Ok((vals, vecs))
}

struct Tridiag<T> {
    diag: Vec<T>,
    off: Vec<T>,
    q: Option<ComplexMatrix<T>>,
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form. Returns the tridiagonal data and, when requested, the accumulated
/// unitary Q with `M = Q T Q^dagger`.
fn tridiagonalize<T: Scalar>(m: &ComplexMatrix<T>, want_q: bool) -> Tridiag<T> {
    let d = m.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut a = m.clone();
    // (column index, Householder vector over rows k+1.., 2/||v||^2)
    let mut reflectors: Vec<(usize, Vec<Complex<T>>, T)> = Vec::new();

    for k in 0..d.saturating_sub(2) {
        let xlen = d - k - 1;
        let x: Vec<Complex<T>> = (0..xlen).map(|i| a.at(k + 1 + i, k)).collect();
        let mut xnorm2 = T::zero();
        for e in &x {
            xnorm2 += e.norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let alpha = x[0];
        let amod = alpha.norm();
        let phase = if amod > T::zero() {
            alpha / Complex::new(amod, T::zero())
        } else {
            one
        };
        // v = x + e^{i arg(alpha)} ||x|| e1 avoids cancellation; then
        // H = I - sigma v v^dagger maps x to -e^{i arg(alpha)} ||x|| e1.
        let mut v = x;
        v[0] += phase * Complex::new(xnorm, T::zero());
        let mut vnorm2 = T::zero();
        for e in &v {
            vnorm2 += e.norm_sqr();
        }
        if vnorm2 == T::zero() {
            continue;
        }
        let sigma = (T::one() + T::one()) / vnorm2;

        // Rank-2 update of the trailing block B = a[k+1.., k+1..]:
        // p = sigma B v, kappa = sigma <v, p> / 2, q = p - kappa v,
        // B <- B - q v^dagger - v q^dagger.
        let mut p = vec![zero; xlen];
        for (i, pi) in p.iter_mut().enumerate() {
            let mut acc = zero;
            for (j, vj) in v.iter().enumerate() {
                acc += a.at(k + 1 + i, k + 1 + j) * vj;
            }
            *pi = acc * Complex::new(sigma, T::zero());
        }
        let mut vp = zero;
        for i in 0..xlen {
            vp += v[i].conj() * p[i];
        }
        let kappa = Complex::new(sigma * vp.re / (T::one() + T::one()), T::zero());
        let q: Vec<Complex<T>> = (0..xlen).map(|i| p[i] - kappa * v[i]).collect();
        for i in 0..xlen {
            for j in 0..xlen {
                let upd = q[i] * v[j].conj() + v[i] * q[j].conj();
                let cur = a.at(k + 1 + i, k + 1 + j);
                a.set(k + 1 + i, k + 1 + j, cur - upd);
            }
        }

        let t = -(phase * Complex::new(xnorm, T::zero()));
        a.set(k + 1, k, t);
        a.set(k, k + 1, t.conj());
        for i in k + 2..d {
            a.set(i, k, zero);
            a.set(k, i, zero);
        }
        reflectors.push((k, v, sigma));
    }

    // Phase similarity making the subdiagonal real nonnegative:
    // D[0] = 1, D[k+1] = t_k D[k] / |t_k|, so (D^dagger T D)[k+1,k] = |t_k|.
    let mut phases = vec![one; d];
    let mut off = vec![T::zero(); d.saturating_sub(1)];
    for k in 0..d.saturating_sub(1) {
        let t = a.at(k + 1, k);
        let beta = t.norm();
        off[k] = beta;
        phases[k + 1] = if beta > T::zero() {
            t * phases[k] / Complex::new(beta, T::zero())
        } else {
            phases[k]
        };
    }
    let diag: Vec<T> = (0..d).map(|i| a.at(i, i).re).collect();

    let q = want_q.then(|| {
        let mut q = ComplexMatrix::zeros(d);
        for (i, ph) in phases.iter().enumerate() {
            q.set(i, i, *ph);
        }
        // Q = H_0 H_1 ... H_last D, built by applying reflectors right to left.
        for (k, v, sigma) in reflectors.iter().rev() {
            let base = k + 1;
            for col in 0..d {
                let mut coef = zero;
                for (i, vi) in v.iter().enumerate() {
                    coef += vi.conj() * q.at(base + i, col);
                }
                coef *= Complex::new(*sigma, T::zero());
                for (i, vi) in v.iter().enumerate() {
                    let cur = q.at(base + i, col);
                    q.set(base + i, col, cur - coef * vi);
                }
            }
        }
        q
    });

    Tridiag { diag, off, q }
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix. `off` has the
/// same length as `diag` with the last slot unused. The callback receives
/// every applied plane rotation (columns i, i+1).
fn tqli<T: Scalar>(
    diag: &mut [T],
    off: &mut [T],
    max_sweeps: usize,
    mut rot: impl FnMut(usize, T, T),
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let two = T::one() + T::one();
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // Find the first negligible subdiagonal at or after l.
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_sweeps {
                return Err(Error::NonConvergence {
                    iterations: max_sweeps,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (two * off[l]);
            let mut r = g.hypot(T::one());
            let sign_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = diag[m] - diag[l] + off[l] / (g + sign_r);
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] -= p;
                    off[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                f = (diag[i] - g) * s + two * c * b;
                p = s * f;
                diag[i + 1] = g + p;
                g = c * f - b;
                rot(i, c, s);
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}

fn rotate_complex_columns<T: Scalar>(q: &mut ComplexMatrix<T>, i: usize, c: T, s: T) {
    let d = q.dim();
    let cc = Complex::new(c, T::zero());
    let ss = Complex::new(s, T::zero());
    for row in 0..d {
        let f = q.at(row, i + 1);
        let g = q.at(row, i);
        q.set(row, i + 1, ss * g + cc * f);
        q.set(row, i, cc * g - ss * f);
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix, used by the
/// Lanczos solver for its projected problem. Returns ascending eigenvalues
/// and, when requested, the row-major eigenvector matrix (column j is the
/// eigenvector of eigenvalue j).
pub(crate) fn eig_sym_tridiagonal<T: Scalar>(
    mut diag: Vec<T>,
    mut off: Vec<T>,
    want_vectors: bool,
    max_sweeps: usize,
) -> Result<(Vec<T>, Option<Vec<T>>)> {
    let n = diag.len();
    off.resize(n, T::zero());
    let mut z: Option<Vec<T>> = want_vectors.then(|| {
        let mut id = vec![T::zero(); n * n];
        for i in 0..n {
            id[i * n + i] = T::one();
        }
        id
    });
    tqli(&mut diag, &mut off, max_sweeps, |i, c, s| {
        if let Some(z) = z.as_mut() {
            for row in 0..n {
                let f = z[row * n + i + 1];
                let g = z[row * n + i];
                z[row * n + i + 1] = s * g + c * f;
                z[row * n + i] = c * g - s * f;
            }
        }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).expect("real eigenvalues"));
    let vals: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vecs = z.map(|z| {
        let mut sorted = vec![T::zero(); n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                sorted[row * n + new_col] = z[row * n + old_col];
            }
        }
        sorted
    });
    Ok((vals, vecs))
}
