//! Real roots of monic polynomials via the balanced companion matrix.
//!
//! The QR iteration runs in complex arithmetic with Wilkinson shifts, so
//! clustered and nearly multiple roots deflate without stagnating. Residuals
//! of the recovered roots are reported so callers can flag ill-conditioned
//! reconstructions instead of silently trusting them.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Scalar;

/// Roots recovered from a companion eigensolve, with a quality signal.
#[derive(Debug, Clone)]
pub struct RootFindResult<T> {
    /// All d roots, real parts sorted ascending.
    pub roots: Vec<T>,
    /// Largest relative residual |p(r)| over the returned roots.
    pub max_residual: T,
    /// Set when residuals or imaginary parts are too large to trust.
    pub ill_conditioned: bool,
}

/// Eigenvalues of the companion matrix of `x^d + c[d-1] x^{d-1} + ... + c[0]`.
///
/// `coeffs[i]` multiplies `x^i`; the leading coefficient is implicitly one.
/// Complex conjugate pairs are projected to their real parts, which is the
/// honest choice when the caller knows the true spectrum is real (power sums
/// of a Hermitian matrix); `ill_conditioned` reports when that projection
/// discards significant imaginary mass.
pub fn real_roots_monic<T: Scalar>(coeffs: &[T]) -> Result<RootFindResult<T>> {
    let d = coeffs.len();
    if d == 0 {
        return Err(Error::ParamRange {
            name: "degree",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());

    // Companion matrix: ones on the subdiagonal, -coeffs in the last column.
    let mut h = vec![zero; d * d];
    for i in 1..d {
        h[i * d + (i - 1)] = one;
    }
    for i in 0..d {
        h[i * d + (d - 1)] = Complex::new(-coeffs[i], T::zero());
    }
    balance(&mut h, d);
    let eigs = hessenberg_qr(&mut h, d)?;

    let coeff_scale = coeffs
        .iter()
        .fold(T::one(), |acc, c| acc.max(c.abs()));
    let mut max_residual = T::zero();
    let mut max_imag = T::zero();
    for e in &eigs {
        let r = poly_eval(coeffs, *e).norm();
        let local = T::one().max(e.norm()).powi(d as i32);
        max_residual = max_residual.max(r / (coeff_scale * local));
        max_imag = max_imag.max(e.im.abs() / T::one().max(e.norm()));
    }
    let thresh = T::from_f64c(1e-4);
    let ill_conditioned = max_residual > thresh || max_imag > thresh;

    let mut roots: Vec<T> = eigs.iter().map(|e| e.re).collect();
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    Ok(RootFindResult {
        roots,
        max_residual,
        ill_conditioned,
    })
}

fn poly_eval<T: Scalar>(coeffs: &[T], x: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    for c in coeffs.iter().rev() {
        acc = acc * x + Complex::new(*c, T::zero());
    }
    acc
}

/// Diagonal similarity with powers of two; reduces norm imbalance without
/// introducing rounding.
fn balance<T: Scalar>(h: &mut [Complex<T>], d: usize) {
    let two = T::from_f64c(2.0);
    for _ in 0..8 {
        let mut converged = true;
        for i in 0..d {
            let mut row = T::zero();
            let mut col = T::zero();
            for j in 0..d {
                if j != i {
                    row += h[i * d + j].norm();
                    col += h[j * d + i].norm();
                }
            }
            if row <= T::zero() || col <= T::zero() {
                continue;
            }
            let mut f = T::one();
            let mut c = col;
            while c < row / two {
                c = c * two * two;
                f *= two;
            }
            while c > row * two {
                c /= two * two;
                f /= two;
            }
            if f != T::one() {
                converged = false;
                let inv = T::one() / f;
                for j in 0..d {
                    h[i * d + j] *= Complex::new(inv, T::zero());
                    h[j * d + i] *= Complex::new(f, T::zero());
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Shifted QR on an upper Hessenberg matrix, complex arithmetic throughout.
fn hessenberg_qr<T: Scalar>(h: &mut [Complex<T>], d: usize) -> Result<Vec<Complex<T>>> {
    let mut eigs = vec![Complex::new(T::zero(), T::zero()); d];
    let mut hi = d; // active block is rows/cols 0..hi
    let max_total = 40 * d.max(1);
    let mut total = 0usize;
    let eps = T::epsilon();

    while hi > 0 {
        if hi == 1 {
            eigs[0] = h[0];
            hi = 0;
            continue;
        }
        // Find the start of the trailing unreduced block.
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[lo * d + lo - 1].norm();
            let local = h[(lo - 1) * d + lo - 1].norm() + h[lo * d + lo].norm();
            if sub <= eps * local.max(T::epsilon()) {
                h[lo * d + lo - 1] = Complex::new(T::zero(), T::zero());
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs[hi - 1] = h[(hi - 1) * d + hi - 1];
            hi -= 1;
            continue;
        }

        total += 1;
        if total > max_total {
            // Give up on further refinement: report the remaining diagonal.
            for i in 0..hi {
                eigs[i] = h[i * d + i];
            }
            return Ok(eigs);
        }

        // Wilkinson shift from the trailing 2x2 of the active block.
        let a = h[(hi - 2) * d + hi - 2];
        let b = h[(hi - 2) * d + hi - 1];
        let c = h[(hi - 1) * d + hi - 2];
        let dd = h[(hi - 1) * d + hi - 1];
        let tr = a + dd;
        let det = a * dd - b * c;
        let half = Complex::new(T::from_f64c(0.5), T::zero());
        let disc = (tr * tr * half * half - det).sqrt();
        let r1 = tr * half + disc;
        let r2 = tr * half - disc;
        let shift = if (r1 - dd).norm() <= (r2 - dd).norm() {
            r1
        } else {
            r2
        };

        // One QR sweep on the block via Givens rotations chasing the shift.
        let mut rots: Vec<(Complex<T>, Complex<T>)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            h[i * d + i] -= shift;
        }
        for i in lo..hi - 1 {
            let (g, s) = givens(h[i * d + i], h[(i + 1) * d + i]);
            apply_givens_rows(h, d, i, i + 1, g, s, i..hi);
            rots.push((g, s));
        }
        for (k, (g, s)) in rots.iter().enumerate() {
            let i = lo + k;
            apply_givens_cols(h, d, i, i + 1, *g, *s, lo..(i + 2).min(hi));
        }
        for i in lo..hi {
            h[i * d + i] += shift;
        }
    }
    Ok(eigs)
}

/// Rotation `[[conj(g), conj(s)], [-s, g]]` zeroing the second entry of
/// `(a, b)`.
fn givens<T: Scalar>(a: Complex<T>, b: Complex<T>) -> (Complex<T>, Complex<T>) {
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if norm <= T::zero() {
        return (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    }
    let inv = Complex::new(T::one() / norm, T::zero());
    (a * inv, b * inv)
}

fn apply_givens_rows<T: Scalar>(
    h: &mut [Complex<T>],
    d: usize,
    r1: usize,
    r2: usize,
    g: Complex<T>,
    s: Complex<T>,
    cols: core::ops::Range<usize>,
) {
    for j in cols {
        let x = h[r1 * d + j];
        let y = h[r2 * d + j];
        h[r1 * d + j] = g.conj() * x + s.conj() * y;
        h[r2 * d + j] = g * y - s * x;
    }
}

fn apply_givens_cols<T: Scalar>(
    h: &mut [Complex<T>],
    d: usize,
    c1: usize,
    c2: usize,
    g: Complex<T>,
    s: Complex<T>,
    rows: core::ops::Range<usize>,
) {
    for i in rows {
        let x = h[i * d + c1];
        let y = h[i * d + c2];
        h[i * d + c1] = x * g + y * s;
        h[i * d + c2] = y * g.conj() - x * s.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn from_roots(roots: &[f64]) -> Vec<f64> {
        // Expand prod (x - r) into monic coefficients c[0..d].
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        c.pop();
        c
    }

    #[test]
    fn linear_and_quadratic() {
        let r = real_roots_monic::<f64>(&[-3.0]).unwrap();
        assert!((r.roots[0] - 3.0).abs() < 1e-12);
        assert!(!r.ill_conditioned);

        // x^2 - 5x + 6 = (x-2)(x-3)
        let r = real_roots_monic(&[6.0, -5.0]).unwrap();
        let roots = sorted(r.roots);
        assert!((roots[0] - 2.0).abs() < 1e-10);
        assert!((roots[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn recovers_spread_roots() {
        let want = [-2.5, -0.5, 0.0, 1.0, 4.0];
        let coeffs = from_roots(&want);
        let r = real_roots_monic(&coeffs).unwrap();
        assert!(!r.ill_conditioned, "residual {}", r.max_residual);
        for (got, want) in r.roots.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_splits_mildly() {
        // (x-1)^2 (x+2): the double root may split by ~sqrt(eps).
        let coeffs = from_roots(&[1.0, 1.0, -2.0]);
        let r = real_roots_monic(&coeffs).unwrap();
        assert!((r.roots[0] + 2.0).abs() < 1e-8);
        assert!((r.roots[1] - 1.0).abs() < 1e-6);
        assert!((r.roots[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn complex_pair_is_flagged() {
        // x^2 + 1: roots +/- i, nothing real to report.
        let r = real_roots_monic(&[1.0, 0.0]).unwrap();
        assert!(r.ill_conditioned);
    }
}
