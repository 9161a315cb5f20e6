//! Shared helpers for the integration suites.
//!
//! The eigenvalue and trace oracles here are deliberately independent of the
//! crate's linear algebra: plain nested-loop products, Faddeev-LeVerrier
//! characteristic polynomials, and Durand-Kerner root iteration. They are
//! slow and only used at small dimensions, which is exactly what makes them
//! trustworthy as cross-checks.
#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qwitness::config::NumericConfig;
use qwitness::linalg::ComplexMatrix;
use qwitness::states::{pure_state, DensityMatrix};

pub type C64 = Complex<f64>;
pub type Mat = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cfg() -> NumericConfig<f64> {
    NumericConfig::default()
}

pub fn to_mat(m: &ComplexMatrix<f64>) -> Mat {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| m.at(i, j)).collect()).collect()
}

pub fn naive_matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = c(0.0, 0.0);
            for k in 0..d {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn mat_trace(m: &Mat) -> C64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

pub fn identity_mat(d: usize) -> Mat {
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    out
}

/// Product trace tr[m_1 m_2 ... m_k] by naive multiplication.
pub fn chain_trace(states: &[&DensityMatrix<f64>]) -> C64 {
    let mut prod = to_mat(states[0].matrix());
    for s in &states[1..] {
        prod = naive_matmul(&prod, &to_mat(s.matrix()));
    }
    mat_trace(&prod)
}

/// Characteristic polynomial of a d x d matrix by Faddeev-LeVerrier:
/// returns [a_1, ..., a_d] with p(x) = x^d + a_1 x^(d-1) + ... + a_d.
pub fn char_poly(m: &Mat) -> Vec<C64> {
    let d = m.len();
    let mut coeffs = Vec::with_capacity(d);
    let mut b = identity_mat(d);
    for k in 1..=d {
        if k > 1 {
            let a_prev = coeffs[k - 2];
            for (i, row) in b.iter_mut().enumerate() {
                row[i] += a_prev;
            }
        }
        b = naive_matmul(m, &b);
        let a_k = -mat_trace(&b) / c(k as f64, 0.0);
        coeffs.push(a_k);
    }
    coeffs
}

/// All complex roots of x^d + a_1 x^(d-1) + ... + a_d by Durand-Kerner.
pub fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let d = coeffs.len();
    let eval = |x: C64| -> C64 {
        let mut acc = c(1.0, 0.0);
        for a in coeffs {
            acc = acc * x + a;
        }
        acc
    };
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C64> = (0..d)
        .map(|k| {
            let mut z = c(1.0, 0.0);
            for _ in 0..k + 1 {
                z *= seed;
            }
            z
        })
        .collect();
    for _ in 0..500 {
        let mut shift_max = 0.0f64;
        for k in 0..d {
            let mut denom = c(1.0, 0.0);
            for j in 0..d {
                if j != k {
                    denom *= roots[k] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let delta = eval(roots[k]) / denom;
            roots[k] -= delta;
            shift_max = shift_max.max(delta.norm());
        }
        if shift_max < 1e-14 {
            break;
        }
    }
    roots
}

/// Eigenvalues of a Hermitian matrix via the characteristic-polynomial
/// oracle; panics if the roots carry significant imaginary parts.
pub fn eig_oracle(m: &Mat) -> Vec<f64> {
    let roots = durand_kerner(&char_poly(m));
    let mut out: Vec<f64> = roots
        .iter()
        .map(|r| {
            assert!(
                r.im.abs() < 1e-6,
                "oracle root {r} is not real; input not Hermitian enough"
            );
            r.re
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

pub fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix<f64> {
    let amps: Vec<C64> = (0..d)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    pure_state(&amps, &cfg()).unwrap()
}

/// Random full-rank density matrix: a convex mixture of d random projectors.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix<f64> {
    let cfg = cfg();
    let mut weights: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut acc = ComplexMatrix::zeros(d);
    for w in &weights {
        let psi = random_pure(rng, d);
        acc = acc.add(&psi.matrix().scaled_real(*w)).unwrap();
    }
    DensityMatrix::new(acc, &cfg).unwrap()
}

/// Random unitary by modified Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix<f64> {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        let mut ok = true;
        for k in 0..d {
            let (done, rest) = cols.split_at_mut(k);
            let col = &mut rest[0];
            for _ in 0..2 {
                for prev in done.iter() {
                    let proj: C64 = prev
                        .iter()
                        .zip(col.iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    for (x, a) in col.iter_mut().zip(prev.iter()) {
                        *x -= proj * a;
                    }
                }
            }
            let norm: f64 = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for x in col.iter_mut() {
                *x /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut m = ComplexMatrix::zeros(d);
        for (col, col_data) in cols.iter().enumerate() {
            for (row, val) in col_data.iter().enumerate() {
                m.set(row, col, *val);
            }
        }
        return m;
    }
}

/// Two random densities diagonal in the same random basis; they commute by
/// construction.
pub fn commuting_pair(rng: &mut ChaCha8Rng, d: usize) -> (DensityMatrix<f64>, DensityMatrix<f64>) {
    let cfg = cfg();
    let q = random_unitary(rng, d);
    let probs = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.02).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    };
    let build = |q: &ComplexMatrix<f64>, diag: &[f64]| -> DensityMatrix<f64> {
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = c(0.0, 0.0);
                for (k, lambda) in diag.iter().enumerate() {
                    acc += q.at(i, k) * c(*lambda, 0.0) * q.at(j, k).conj();
                }
                m.set(i, j, acc);
            }
        }
        DensityMatrix::new(m, &cfg).unwrap()
    };
    let a = probs(rng);
    let b = probs(rng);
    (build(&q, &a), build(&q, &b))
}

/// |<psi|phi>| for two pure-state density matrices: sqrt(tr[P Q]).
pub fn pure_overlap(a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> f64 {
    let prod = naive_matmul(&to_mat(a.matrix()), &to_mat(b.matrix()));
    mat_trace(&prod).re.max(0.0).sqrt()
}
