//! The measurement protocol: SHIFT permutations, the controlled-SHIFT
//! Hadamard test, product moments, and spectrum recovery from power sums.
//!
//! The SHIFT operator cyclically advances tensor registers,
//! `S |j_1, j_2, ..., j_l> = |j_2, ..., j_l, j_1>`, which turns a one-sided
//! trace into a matrix-product trace:
//!
//! ```text
//! tr[S (rho_1 (x) ... (x) rho_l)] = tr[rho_1 rho_2 ... rho_l]
//! ```
//!
//! A control qubit driving `C_S = |0><0| (x) I + |1><1| (x) S` therefore
//! estimates product traces; with alternating registers this yields the
//! moments `j_l = tr[(rho_X rho_Z)^l]`, and expanding the anticommutator
//! power `(rho_X rho_Z + rho_Z rho_X)^l` word by word yields `tr[J^l]`,
//! from which Newton's identities recover the witness spectrum.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::linalg::{real_roots_monic, ComplexMatrix};
use crate::states::DensityMatrix;
use crate::Scalar;

/// Cyclic register shift on `l` registers of dimension `d`, stored as its
/// index permutation; never materialized densely above 2^12.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftOperator {
    l: u32,
    d: usize,
    dim: usize,
}

impl ShiftOperator {
    pub fn new<T: Scalar>(l: u32, d: usize, cfg: &NumericConfig<T>) -> Result<Self> {
        if l == 0 || d == 0 {
            return Err(Error::ParamRange {
                name: "shift shape",
                value: 0.0,
                expected: "l >= 1 and d >= 1",
            });
        }
        let mut total: u128 = 1;
        for _ in 0..l {
            total = total.saturating_mul(d as u128);
        }
        let dim = cfg.check_dim(total)?;
        Ok(ShiftOperator { l, d, dim })
    }

    pub fn registers(&self) -> u32 {
        self.l
    }

    pub fn register_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Image of a basis index: the first register's digit moves to the last
    /// (least significant) slot. Exact integer arithmetic.
    pub fn permute_index(&self, j: usize) -> usize {
        debug_assert!(j < self.dim);
        let stride = self.dim / self.d;
        (j % stride) * self.d + j / stride
    }

    /// `out = S v`.
    pub fn apply<T: Scalar>(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        for (j, &value) in v.iter().enumerate() {
            out[self.permute_index(j)] = value;
        }
    }

    /// Dense permutation matrix; refused above dimension 2^12.
    pub fn dense<T: Scalar>(&self) -> Result<ComplexMatrix<T>> {
        if self.dim > 1 << 12 {
            return Err(Error::Unsupported(
                "dense SHIFT matrices are limited to dimension 4096",
            ));
        }
        let mut m = ComplexMatrix::zeros(self.dim);
        let one = Complex::new(T::one(), T::zero());
        for j in 0..self.dim {
            m.set(self.permute_index(j), j, one);
        }
        Ok(m)
    }
}

/// `tr[S (rho_1 (x) ... (x) rho_l)] = tr[rho_1 ... rho_l]`, evaluated by
/// summing over the closed index chains the permutation induces; no dense
/// `d^l` operator is built.
pub fn shift_trace<T: Scalar>(
    states: &[&DensityMatrix<T>],
    cfg: &NumericConfig<T>,
) -> Result<Complex<T>> {
    let l = states.len();
    if l == 0 {
        return Err(Error::ParamRange {
            name: "registers",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let d = states[0].dim();
    for s in states {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: s.dim(),
            });
        }
    }
    let mut total: u128 = 1;
    for _ in 0..l {
        total = total.saturating_mul(d as u128);
    }
    cfg.check_dim(total)?;

    // Sum over digit chains (k_1, ..., k_l) of
    // rho_1[k_1, k_2] rho_2[k_2, k_3] ... rho_l[k_l, k_1].
    let zero = Complex::new(T::zero(), T::zero());
    let mut acc = zero;
    let mut digits = vec![0usize; l];
    loop {
        let mut term = Complex::new(T::one(), T::zero());
        for (m, state) in states.iter().enumerate() {
            let row = digits[m];
            let col = digits[(m + 1) % l];
            term *= state.matrix().at(row, col);
            if term.re == T::zero() && term.im == T::zero() {
                break;
            }
        }
        acc += term;

        // Odometer over the digit vector.
        let mut pos = l;
        loop {
            if pos == 0 {
                return Ok(acc);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// One Hadamard-test run: the exact controlled-SHIFT expectation and,
/// when `shots > 0`, a seeded sample of the control-qubit statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitEvaluation<T> {
    /// Number of tensor registers under the SHIFT.
    pub registers: u32,
    /// tr[S (rho_1 (x) ... (x) rho_l)].
    pub exact: Complex<T>,
    pub shots: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sampled estimate further than six standard errors from the exact
    /// value; flagged, never fatal.
    pub deviation_flagged: bool,
}

/// Controlled-SHIFT Hadamard test. The control-qubit z-expectation equals
/// `Re tr[S (x)rho_i]`; sampling draws from the induced two-outcome
/// distribution with the given seed, so results are deterministic per seed.
/// `shots = 0` computes the exact value only.
pub fn hadamard_test<T: Scalar>(
    states: &[&DensityMatrix<T>],
    shots: u64,
    seed: u64,
    cfg: &NumericConfig<T>,
) -> Result<CircuitEvaluation<T>> {
    let exact = shift_trace(states, cfg)?;
    let e = exact.re.as_f64();
    if e.abs() > 1.0 + 1e-9 {
        return Err(Error::Internal(format!(
            "SHIFT expectation {e} exceeds the unit bound; trace evaluation is broken"
        )));
    }
    if shots == 0 {
        return Ok(CircuitEvaluation {
            registers: states.len() as u32,
            exact,
            shots,
            sampled: None,
            std_error: None,
            seed: None,
            deviation_flagged: false,
        });
    }

    // P(control reads +1) = (1 + E)/2.
    let p_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plus = 0u64;
    for _ in 0..shots {
        if rng.gen::<f64>() < p_plus {
            plus += 1;
        }
    }
    let estimate = (2.0 * plus as f64 - shots as f64) / shots as f64;
    let variance = (1.0 - e * e).max(0.0);
    let std_error = (variance / shots as f64).sqrt();
    let deviation_flagged = (estimate - e).abs() > 6.0 * std_error && std_error > 0.0;

    Ok(CircuitEvaluation {
        registers: states.len() as u32,
        exact,
        shots,
        sampled: Some(T::from_f64c(estimate)),
        std_error: Some(T::from_f64c(std_error)),
        seed: Some(seed),
        deviation_flagged,
    })
}

/// Product moments `j_l = tr[(rho_X rho_Z)^l]`, l = 1..L.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentVector<T> {
    /// values[l - 1] = j_l.
    pub values: Vec<T>,
}

impl<T: Scalar> MomentVector<T> {
    pub fn j(&self, l: usize) -> T {
        self.values[l - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Moments plus the per-moment circuit evaluations they came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentsResult<T> {
    pub moments: MomentVector<T>,
    pub evaluations: Vec<CircuitEvaluation<T>>,
}

/// Evaluates `j_l` for l = 1..l_max on 2l alternating registers
/// (rho_X, rho_Z, rho_X, ...) per moment. Each moment derives its sampling
/// seed from `seed` and l, so individual moments are reproducible in
/// isolation. The exact moment must be real within 1e-9.
pub fn moments<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    l_max: u32,
    shots_per_moment: u64,
    seed: u64,
    cfg: &NumericConfig<T>,
) -> Result<MomentsResult<T>> {
    if l_max == 0 {
        return Err(Error::ParamRange {
            name: "l_max",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut values = Vec::with_capacity(l_max as usize);
    let mut evaluations = Vec::with_capacity(l_max as usize);
    for l in 1..=l_max {
        let mut registers: Vec<&DensityMatrix<T>> = Vec::with_capacity(2 * l as usize);
        for _ in 0..l {
            registers.push(rho_x);
            registers.push(rho_z);
        }
        let subseed = seed ^ (l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let eval = hadamard_test(&registers, shots_per_moment, subseed, cfg)?;
        if eval.exact.im.abs().as_f64() > 1e-9 {
            return Err(Error::Internal(format!(
                "moment j_{l} has imaginary residue {}",
                eval.exact.im.as_f64()
            )));
        }
        values.push(eval.exact.re);
        evaluations.push(eval);
    }
    Ok(MomentsResult {
        moments: MomentVector { values },
        evaluations,
    })
}

/// `tr[J^l]` for l = 1..l_max, J = {rho_X, rho_Z}, assembled by expanding
/// `(rho_X rho_Z + rho_Z rho_X)^l` into its 2^l ordered words and evaluating
/// each word's 2l-register SHIFT trace. Words equivalent under cyclic
/// rotation of the register string share one evaluation; the class
/// multiplicity scales the result. The total imaginary residue must stay
/// below 1e-9 and is then discarded.
pub fn witness_power_traces<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    l_max: u32,
    cfg: &NumericConfig<T>,
) -> Result<Vec<T>> {
    if l_max == 0 {
        return Err(Error::ParamRange {
            name: "l_max",
            value: 0.0,
            expected: ">= 1",
        });
    }
    if l_max >= 63 {
        return Err(Error::Unsupported(
            "witness power word expansion is limited to l < 63",
        ));
    }
    let mut out = Vec::with_capacity(l_max as usize);
    for l in 1..=l_max {
        // Register label strings: bit 0 of a word selects XZ, bit 1 selects
        // ZX; labels are 0 = rho_X, 1 = rho_Z.
        let mut classes: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        for word in 0u64..(1u64 << l) {
            let mut labels = Vec::with_capacity(2 * l as usize);
            for bit in 0..l {
                if word >> bit & 1 == 0 {
                    labels.push(0u8);
                    labels.push(1u8);
                } else {
                    labels.push(1u8);
                    labels.push(0u8);
                }
            }
            *classes.entry(canonical_rotation(&labels)).or_insert(0) += 1;
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (labels, count) in &classes {
            let registers: Vec<&DensityMatrix<T>> = labels
                .iter()
                .map(|&b| if b == 0 { rho_x } else { rho_z })
                .collect();
            let term = shift_trace(&registers, cfg)?;
            acc += term * Complex::new(T::from_f64c(*count as f64), T::zero());
        }
        if acc.im.abs().as_f64() > 1e-9 {
            return Err(Error::Internal(format!(
                "tr[J^{l}] has imaginary residue {}",
                acc.im.as_f64()
            )));
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// Lexicographically smallest cyclic rotation; the trace of a register
/// product is invariant under rotating the register string.
fn canonical_rotation(labels: &[u8]) -> Vec<u8> {
    let n = labels.len();
    let mut best: Option<Vec<u8>> = None;
    for start in 0..n {
        let rotated: Vec<u8> = (0..n).map(|i| labels[(start + i) % n]).collect();
        if best.as_ref().map_or(true, |b| rotated < *b) {
            best = Some(rotated);
        }
    }
    best.unwrap_or_default()
}

/// Spectrum reconstructed from power sums, with root-quality diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult<T> {
    /// Ascending; length equals the requested dimension.
    pub eigenvalues: Vec<T>,
    pub max_residual: T,
    /// Set when root residuals exceed 1e-4; expect this to trip as the
    /// dimension grows, since Newton-identity conditioning degrades.
    pub ill_conditioned: bool,
}

/// Newton's identities convert `power_sums[l-1] = sum_i lambda_i^l`
/// (l = 1..d) into the characteristic polynomial, whose real roots are the
/// eigenvalues.
pub fn spectrum_from_powers<T: Scalar>(power_sums: &[T], d: usize) -> Result<SpectrumResult<T>> {
    if power_sums.len() != d {
        return Err(Error::BadEntryCount {
            got: power_sums.len(),
            expected: d,
        });
    }
    if d == 0 {
        return Err(Error::ParamRange {
            name: "d",
            value: 0.0,
            expected: ">= 1",
        });
    }
    // k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i.
    let mut elementary = vec![T::zero(); d + 1];
    elementary[0] = T::one();
    for k in 1..=d {
        let mut acc = T::zero();
        let mut sign = T::one();
        for i in 1..=k {
            acc += sign * elementary[k - i] * power_sums[i - 1];
            sign = -sign;
        }
        elementary[k] = acc / T::from_f64c(k as f64);
    }
    // Monic characteristic polynomial: coefficient of x^(d-j) is (-1)^j e_j.
    let mut coeffs = vec![T::zero(); d];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let j = d - i;
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        *c = sign * elementary[j];
    }
    let roots = real_roots_monic(&coeffs)?;
    Ok(SpectrumResult {
        eigenvalues: roots.roots,
        max_residual: roots.max_residual,
        ill_conditioned: roots.ill_conditioned,
    })
}
