//! Quantumness witnesses built from anticommutators.
//!
//! The base witness of a state pair is `J = {rho_X, rho_Z}`; a negative
//! eigenvalue certifies that no joint classical description produces both
//! states (commuting pairs always give a positive semidefinite J). Two
//! amplified variants act on n-qubit registers:
//!
//! * tensor power: `J^(n) = {rho_X^(xn), rho_Z^(xn)}`;
//! * correlated: each tensor power is conjugated by a flip cascade before
//!   the anticommutator is formed. `U` flips every target qubit when the
//!   control is |1>, so it correlates the Z-family register in the
//!   computational basis; `V = H^(xn) U H^(xn)` is the same cascade in the
//!   +/- basis and correlates the X-family register. The witness is
//!   `{V rho_X^(xn) V, U rho_Z^(xn) U}` (both cascades are Hermitian
//!   involutions, so conjugation reads the same from either side).
//!
//! Above the dense crossover dimension the operators are never materialized;
//! the action is applied factor-wise with the cascades as gate passes.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, eig_hermitian, matmul, min_eig_matfree, tensor, tensor_power, ComplexMatrix,
    HermitianView, TensorFactoredOperator,
};
use crate::states::DensityMatrix;
use crate::Scalar;

/// Which witness construction produced an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessFamily {
    Plain,
    TensorPower,
    Correlated,
}

impl std::fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl WitnessFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessFamily::Plain => "plain",
            WitnessFamily::TensorPower => "tensor-power",
            WitnessFamily::Correlated => "correlated",
        }
    }
}

impl std::str::FromStr for WitnessFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(WitnessFamily::Plain),
            "tensor-power" | "tensor_power" => Ok(WitnessFamily::TensorPower),
            "correlated" => Ok(WitnessFamily::Correlated),
            other => Err(Error::Parse(format!("unknown witness family: {other}"))),
        }
    }
}

/// Which eigensolver backed a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Dense,
    MatrixFree,
}

/// Outcome of [`assess`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumnessVerdict<T> {
    pub min_eigenvalue: T,
    /// Strictly `min_eigenvalue < -tolerance`.
    pub is_quantum: bool,
    pub tolerance: T,
    /// Diagnostic: the minimum lies within the tolerance band of zero.
    pub boundary: bool,
    pub solver: SolverPath,
}

/// A witness operator, dense below the crossover dimension and matrix-free
/// above it.
#[derive(Debug, Clone)]
pub struct WitnessOperator<T> {
    family: WitnessFamily,
    n: u32,
    dim: usize,
    body: WitnessBody<T>,
    base: (DensityMatrix<T>, DensityMatrix<T>),
}

#[derive(Debug, Clone)]
enum WitnessBody<T> {
    Dense(HermitianView<T>),
    MatrixFree(MatFreeWitness<T>),
}

impl<T: Scalar> WitnessOperator<T> {
    pub fn family(&self) -> WitnessFamily {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.body, WitnessBody::Dense(_))
    }

    /// The single-register input pair the witness was built from.
    pub fn base(&self) -> (&DensityMatrix<T>, &DensityMatrix<T>) {
        (&self.base.0, &self.base.1)
    }

    /// `out = J v`.
    pub fn apply(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        match &self.body {
            WitnessBody::Dense(view) => view.matrix().apply(v, out),
            WitnessBody::MatrixFree(mf) => mf.apply(v, out),
        }
    }

    /// Dense form of the operator; columns are recovered through the action
    /// when the witness is matrix-free.
    pub fn to_dense(&self, cfg: &NumericConfig<T>) -> Result<ComplexMatrix<T>> {
        cfg.check_dim(self.dim as u128)?;
        match &self.body {
            WitnessBody::Dense(view) => Ok(view.matrix().clone()),
            WitnessBody::MatrixFree(_) => {
                let d = self.dim;
                let zero = Complex::new(T::zero(), T::zero());
                let mut m = ComplexMatrix::zeros(d);
                let mut basis = vec![zero; d];
                let mut col = vec![zero; d];
                for j in 0..d {
                    basis[j] = Complex::new(T::one(), T::zero());
                    self.apply(&basis, &mut col);
                    basis[j] = zero;
                    for (i, c) in col.iter().enumerate() {
                        m.set(i, j, *c);
                    }
                }
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct MatFreeWitness<T> {
    tx: TensorFactoredOperator<T>,
    tz: TensorFactoredOperator<T>,
    correlated: bool,
    dim: usize,
}

impl<T: Scalar> MatFreeWitness<T> {
    /// `out = {A, B} v` with A, B the (possibly cascade-conjugated) powers.
    fn apply(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut tmp = vec![zero; self.dim];
        let mut ab = vec![zero; self.dim];

        self.apply_z(v, &mut tmp);
        self.apply_x(&tmp, &mut ab);

        self.apply_x(v, &mut tmp);
        self.apply_z(&tmp, out);

        for (o, a) in out.iter_mut().zip(&ab) {
            *o += *a;
        }
    }

    fn apply_x(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        if self.correlated {
            let mut staged = v.to_vec();
            cascade_plus_basis(&mut staged);
            self.tx.apply(&staged, out);
            cascade_plus_basis(out);
        } else {
            self.tx.apply(v, out);
        }
    }

    fn apply_z(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        if self.correlated {
            let mut staged = v.to_vec();
            cascade_computational(&mut staged);
            self.tz.apply(&staged, out);
            cascade_computational(out);
        } else {
            self.tz.apply(v, out);
        }
    }
}

/// Flip cascade in the computational basis: when the leading qubit is |1>,
/// flip every remaining qubit. The leading qubit owns the top bit of the
/// index. Acts in place; an involution.
fn cascade_computational<T: Scalar>(v: &mut [Complex<T>]) {
    let dim = v.len();
    let half = dim / 2;
    if half < 2 {
        return;
    }
    let mask = half - 1;
    for idx in 0..half {
        let partner = idx ^ mask;
        if idx < partner {
            v.swap(half + idx, half + partner);
        }
    }
}

/// The same cascade expressed in the +/- basis: Hadamard on the control,
/// parity phase on the targets when the control is |1>, Hadamard again.
fn cascade_plus_basis<T: Scalar>(v: &mut [Complex<T>]) {
    let dim = v.len();
    let half = dim / 2;
    if half < 2 {
        return;
    }
    hadamard_control(v, half);
    for idx in 0..half {
        if (idx as u64).count_ones() % 2 == 1 {
            v[half + idx] = -v[half + idx];
        }
    }
    hadamard_control(v, half);
}

fn hadamard_control<T: Scalar>(v: &mut [Complex<T>], half: usize) {
    let s = Complex::new(T::from_f64c(std::f64::consts::FRAC_1_SQRT_2), T::zero());
    for idx in 0..half {
        let a = v[idx];
        let b = v[half + idx];
        v[idx] = (a + b) * s;
        v[half + idx] = (a - b) * s;
    }
}

fn check_pair<T: Scalar>(rho_x: &DensityMatrix<T>, rho_z: &DensityMatrix<T>) -> Result<usize> {
    if rho_x.dim() != rho_z.dim() {
        return Err(Error::DimensionMismatch {
            left: rho_x.dim(),
            right: rho_z.dim(),
        });
    }
    Ok(rho_x.dim())
}

/// `J = {rho_X, rho_Z}`, always dense.
pub fn anticommutator_witness<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    cfg: &NumericConfig<T>,
) -> Result<WitnessOperator<T>> {
    let dim = check_pair(rho_x, rho_z)?;
    cfg.check_dim(dim as u128)?;
    let j = anticommutator(rho_x.matrix(), rho_z.matrix())?;
    // {A, B} of Hermitian A, B is Hermitian up to rounding.
    let view = HermitianView::new(j, T::from_f64c(1e-8))?;
    Ok(WitnessOperator {
        family: WitnessFamily::Plain,
        n: 1,
        dim,
        body: WitnessBody::Dense(view),
        base: (rho_x.clone(), rho_z.clone()),
    })
}

/// `J^(n) = {rho_X^(xn), rho_Z^(xn)}`; matrix-free above the crossover.
pub fn tensor_power_witness<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    n: u32,
    cfg: &NumericConfig<T>,
) -> Result<WitnessOperator<T>> {
    build_power_witness(rho_x, rho_z, n, false, cfg)
}

/// Correlated witness `{V rho_X^(xn) V, U rho_Z^(xn) U}`; requires qubit
/// inputs because the cascades act on qubit registers.
pub fn correlated_witness<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    n: u32,
    cfg: &NumericConfig<T>,
) -> Result<WitnessOperator<T>> {
    if rho_x.dim() != 2 || rho_z.dim() != 2 {
        return Err(Error::Unsupported(
            "correlated witness acts on qubit registers",
        ));
    }
    build_power_witness(rho_x, rho_z, n, true, cfg)
}

fn build_power_witness<T: Scalar>(
    rho_x: &DensityMatrix<T>,
    rho_z: &DensityMatrix<T>,
    n: u32,
    correlated: bool,
    cfg: &NumericConfig<T>,
) -> Result<WitnessOperator<T>> {
    let base_dim = check_pair(rho_x, rho_z)?;
    if n == 0 {
        return Err(Error::ParamRange {
            name: "n",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(base_dim as u128);
    }
    let dim = cfg.check_dim(total)?;
    let family = if correlated {
        WitnessFamily::Correlated
    } else {
        WitnessFamily::TensorPower
    };

    let body = if dim <= cfg.dense_crossover {
        let px = tensor_power(rho_x.matrix(), n, cfg)?;
        let pz = tensor_power(rho_z.matrix(), n, cfg)?;
        let (ax, bz) = if correlated && n > 1 {
            let (u, v) = correlating_unitaries(n, cfg)?;
            (conjugate(&v, &px)?, conjugate(&u, &pz)?)
        } else {
            (px, pz)
        };
        let j = anticommutator(&ax, &bz)?;
        WitnessBody::Dense(HermitianView::new(j, T::from_f64c(1e-8))?)
    } else {
        let tx = TensorFactoredOperator::power(rho_x.matrix().clone(), n, cfg)?;
        let tz = TensorFactoredOperator::power(rho_z.matrix().clone(), n, cfg)?;
        WitnessBody::MatrixFree(MatFreeWitness {
            tx,
            tz,
            correlated: correlated && n > 1,
            dim,
        })
    };
    Ok(WitnessOperator {
        family,
        n,
        dim,
        body,
        base: (rho_x.clone(), rho_z.clone()),
    })
}

/// `W M W^dagger` for Hermitian involutions W; written as plain conjugation
/// so it stays correct if W ever stops being an involution.
fn conjugate<T: Scalar>(w: &ComplexMatrix<T>, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    matmul(&matmul(w, m)?, &w.adjoint())
}

/// Dense cascades `(U, V)` on n qubits.
///
/// `U = |0><0| (x) I + |1><1| (x) X^(x(n-1))` and `V = H^(xn) U H^(xn)`,
/// equal to `|+><+| (x) I + |-><-| (x) Z^(x(n-1))`. For n = 1 both are the
/// identity.
pub fn correlating_unitaries<T: Scalar>(
    n: u32,
    cfg: &NumericConfig<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    if n == 0 {
        return Err(Error::ParamRange {
            name: "n",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let dim = cfg.check_dim(1u128 << n.min(127))?;
    if n == 1 {
        return Ok((ComplexMatrix::identity(2), ComplexMatrix::identity(2)));
    }
    let one = Complex::new(T::one(), T::zero());
    let half = T::from_f64c(0.5);

    let mut p0 = ComplexMatrix::zeros(2);
    p0.set(0, 0, one);
    let mut p1 = ComplexMatrix::zeros(2);
    p1.set(1, 1, one);
    let mut pauli_x = ComplexMatrix::zeros(2);
    pauli_x.set(0, 1, one);
    pauli_x.set(1, 0, one);
    let mut pauli_z = ComplexMatrix::zeros(2);
    pauli_z.set(0, 0, one);
    pauli_z.set(1, 1, -one);
    let mut p_plus = ComplexMatrix::zeros(2);
    let mut p_minus = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let sign = if i != j { -T::one() } else { T::one() };
            p_plus.set(i, j, Complex::new(half, T::zero()));
            p_minus.set(i, j, Complex::new(half * sign, T::zero()));
        }
    }

    let ident_rest = ComplexMatrix::identity(dim / 2);
    let x_rest = tensor_power(&pauli_x, n - 1, cfg)?;
    let z_rest = tensor_power(&pauli_z, n - 1, cfg)?;

    let u = tensor(&p0, &ident_rest, cfg)?.add(&tensor(&p1, &x_rest, cfg)?)?;
    let v = tensor(&p_plus, &ident_rest, cfg)?.add(&tensor(&p_minus, &z_rest, cfg)?)?;
    Ok((u, v))
}

/// Quantumness verdict with the default numeric configuration.
pub fn assess<T: Scalar>(w: &WitnessOperator<T>, tol: T) -> Result<QuantumnessVerdict<T>> {
    assess_with(w, tol, &NumericConfig::default())
}

/// Quantumness verdict: `is_quantum` iff the smallest eigenvalue is strictly
/// below `-tol`. A minimum within `tol` of zero additionally sets `boundary`.
pub fn assess_with<T: Scalar>(
    w: &WitnessOperator<T>,
    tol: T,
    cfg: &NumericConfig<T>,
) -> Result<QuantumnessVerdict<T>> {
    let (min_eigenvalue, solver) = match &w.body {
        WitnessBody::Dense(view) => (eig_hermitian(view)?[0], SolverPath::Dense),
        WitnessBody::MatrixFree(mf) => (
            min_eig_matfree(|v, out| mf.apply(v, out), mf.dim, cfg)?,
            SolverPath::MatrixFree,
        ),
    };
    Ok(QuantumnessVerdict {
        min_eigenvalue,
        is_quantum: min_eigenvalue < -tol,
        tolerance: tol,
        boundary: min_eigenvalue.abs() <= tol,
        solver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{mixed_pair, pure_state};

    fn cfg() -> NumericConfig<f64> {
        NumericConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn dense_min_eig(w: &WitnessOperator<f64>) -> f64 {
        assess(w, 1e-9).unwrap().min_eigenvalue
    }

    #[test]
    fn maximally_mixed_pair_gives_half_identity() {
        let (x, z) = mixed_pair(0.0).unwrap();
        let w = anticommutator_witness(&x, &z, &cfg()).unwrap();
        let j = w.to_dense(&cfg()).unwrap();
        assert!((j.at(0, 0).re - 0.5).abs() < 1e-15);
        assert!((j.at(1, 1).re - 0.5).abs() < 1e-15);
        assert!(j.at(0, 1).norm() < 1e-15);
        let verdict = assess(&w, 1e-9).unwrap();
        assert!(!verdict.is_quantum);
        assert!((verdict.min_eigenvalue - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_pair_spectrum() {
        // J of |+><+| and |0><0| has trace 2 tr[rho_X rho_Z] = 1 and
        // nonzero eigenvalues c^2 +/- c at overlap c = 1/sqrt(2):
        // (1 +/- sqrt(2))/2.
        let plus = pure_state(&[c(1.0, 0.0), c(1.0, 0.0)], &cfg()).unwrap();
        let zero = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)], &cfg()).unwrap();
        let w = anticommutator_witness(&plus, &zero, &cfg()).unwrap();
        let j = w.to_dense(&cfg()).unwrap();
        let eigs = eig_hermitian(&HermitianView::new_default(j).unwrap()).unwrap();
        let lo = (1.0 - std::f64::consts::SQRT_2) / 2.0;
        let hi = (1.0 + std::f64::consts::SQRT_2) / 2.0;
        assert!((eigs[0] - lo).abs() < 1e-9, "{}", eigs[0]);
        assert!((eigs[1] - hi).abs() < 1e-9, "{}", eigs[1]);
        assert!(assess(&w, 1e-9).unwrap().is_quantum);
    }

    #[test]
    fn diagonal_pairs_give_product_spectrum() {
        let cfg = cfg();
        let a = [0.7, 0.3];
        let b = [0.2, 0.8];
        let rho_a = crate::states::DensityMatrix::new(
            ComplexMatrix::from_diagonal(&a),
            &cfg,
        )
        .unwrap();
        let rho_b = crate::states::DensityMatrix::new(
            ComplexMatrix::from_diagonal(&b),
            &cfg,
        )
        .unwrap();
        let w = anticommutator_witness(&rho_a, &rho_b, &cfg).unwrap();
        let j = w.to_dense(&cfg).unwrap();
        let mut eigs = eig_hermitian(&HermitianView::new_default(j).unwrap()).unwrap();
        let mut expected = vec![2.0 * a[0] * b[0], 2.0 * a[1] * b[1]];
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (e, x) in eigs.iter().zip(&expected) {
            assert!((e - x).abs() < 1e-12);
        }
        assert!(!assess(&w, 1e-9).unwrap().is_quantum);
    }

    #[test]
    fn plain_family_verdicts() {
        let (x, z) = mixed_pair(0.8).unwrap();
        let w = anticommutator_witness(&x, &z, &cfg()).unwrap();
        assert!(assess(&w, 1e-9).unwrap().is_quantum);

        let (x, z) = mixed_pair(0.5).unwrap();
        let w = anticommutator_witness(&x, &z, &cfg()).unwrap();
        assert!(!assess(&w, 1e-9).unwrap().is_quantum);
    }

    #[test]
    fn tensor_power_reduces_to_plain_at_n1() {
        let (x, z) = mixed_pair(0.73).unwrap();
        let plain = anticommutator_witness(&x, &z, &cfg()).unwrap();
        let power = tensor_power_witness(&x, &z, 1, &cfg()).unwrap();
        assert!((dense_min_eig(&plain) - dense_min_eig(&power)).abs() < 1e-12);
        assert_eq!(power.family(), WitnessFamily::TensorPower);
    }

    #[test]
    fn tensor_power_sign_flip_across_critical_point() {
        let (x, z) = mixed_pair(0.65).unwrap();
        let w = tensor_power_witness(&x, &z, 2, &cfg()).unwrap();
        assert!(assess(&w, 1e-9).unwrap().is_quantum);

        let (x, z) = mixed_pair(0.60).unwrap();
        let w = tensor_power_witness(&x, &z, 2, &cfg()).unwrap();
        assert!(!assess(&w, 1e-9).unwrap().is_quantum);
    }

    #[test]
    fn correlation_strictly_enhances_detection_at_n2() {
        let (x, z) = mixed_pair(0.55).unwrap();
        let corr = correlated_witness(&x, &z, 2, &cfg()).unwrap();
        let tens = tensor_power_witness(&x, &z, 2, &cfg()).unwrap();
        assert!(assess(&corr, 1e-9).unwrap().is_quantum);
        assert!(!assess(&tens, 1e-9).unwrap().is_quantum);
    }

    #[test]
    fn correlated_pure_inputs_stay_quantum() {
        for n in [2u32, 3] {
            let (x, z) = mixed_pair(1.0).unwrap();
            let w = correlated_witness(&x, &z, n, &cfg()).unwrap();
            assert!(assess(&w, 1e-9).unwrap().is_quantum, "n = {n}");
        }
    }

    #[test]
    fn unitaries_are_involutive_cascades() {
        let cfg = cfg();
        let (u1, v1) = correlating_unitaries(1, &cfg).unwrap();
        assert!((u1.sub(&ComplexMatrix::identity(2)).unwrap().max_abs()) < 1e-15);
        assert!((v1.sub(&ComplexMatrix::identity(2)).unwrap().max_abs()) < 1e-15);

        let (u2, _) = correlating_unitaries(2, &cfg).unwrap();
        // Standard CNOT with the first qubit as control.
        let cnot = ComplexMatrix::new(
            4,
            vec![
                c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(u2.sub(&cnot).unwrap().max_abs() < 1e-15);

        for n in [2u32, 3, 4] {
            let (u, v) = correlating_unitaries(n, &cfg).unwrap();
            for w in [&u, &v] {
                let prod = matmul(&w.adjoint(), w).unwrap();
                let dev = prod
                    .sub(&ComplexMatrix::identity(w.dim()))
                    .unwrap()
                    .max_abs();
                assert!(dev < 1e-12, "n = {n}, deviation {dev}");
            }
        }
    }

    #[test]
    fn cascade_maps_one_zeros_to_all_ones() {
        let cfg = cfg();
        let (u, _) = correlating_unitaries(3, &cfg).unwrap();
        // |100> is index 4; U sends it to |111> = index 7.
        let mut input = vec![c(0.0, 0.0); 8];
        input[4] = c(1.0, 0.0);
        let mut out = vec![c(0.0, 0.0); 8];
        u.apply(&input, &mut out);
        assert!((out[7] - c(1.0, 0.0)).norm() < 1e-15);
        let leak: f64 = out
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 7)
            .map(|(_, x)| x.norm())
            .sum();
        assert!(leak < 1e-15);
    }

    #[test]
    fn gate_cascades_match_dense_unitaries() {
        use rand::{Rng, SeedableRng};
        let cfg = cfg();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2u32, 3, 4] {
            let dim = 1usize << n;
            let (u, v) = correlating_unitaries(n, &cfg).unwrap();
            for _ in 0..4 {
                let input: Vec<Complex<f64>> = (0..dim)
                    .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                let mut dense_out = vec![c(0.0, 0.0); dim];

                u.apply(&input, &mut dense_out);
                let mut gate_out = input.clone();
                cascade_computational(&mut gate_out);
                for (a, b) in dense_out.iter().zip(&gate_out) {
                    assert!((a - b).norm() < 1e-12);
                }

                v.apply(&input, &mut dense_out);
                let mut gate_out = input.clone();
                cascade_plus_basis(&mut gate_out);
                for (a, b) in dense_out.iter().zip(&gate_out) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matrix_free_path_matches_dense() {
        let mut low_crossover = cfg();
        low_crossover.dense_crossover = 1;
        for p in [0.3, 0.55, 0.9] {
            let (x, z) = mixed_pair(p).unwrap();
            for n in [2u32, 3] {
                let dense_t = tensor_power_witness(&x, &z, n, &cfg()).unwrap();
                let free_t = tensor_power_witness(&x, &z, n, &low_crossover).unwrap();
                assert!(!free_t.is_dense());
                let a = dense_min_eig(&dense_t);
                let b = assess_with(&free_t, 1e-9, &low_crossover)
                    .unwrap()
                    .min_eigenvalue;
                assert!((a - b).abs() < 1e-8, "tensor n={n} p={p}: {a} vs {b}");

                let dense_c = correlated_witness(&x, &z, n, &cfg()).unwrap();
                let free_c = correlated_witness(&x, &z, n, &low_crossover).unwrap();
                assert!(!free_c.is_dense());
                let a = dense_min_eig(&dense_c);
                let b = assess_with(&free_c, 1e-9, &low_crossover)
                    .unwrap()
                    .min_eigenvalue;
                assert!((a - b).abs() < 1e-8, "correlated n={n} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugated_powers_remain_valid_densities() {
        let cfg = cfg();
        let (x, z) = mixed_pair(0.62).unwrap();
        let (u, v) = correlating_unitaries(2, &cfg).unwrap();
        let px = tensor_power(x.matrix(), 2, &cfg).unwrap();
        let pz = tensor_power(z.matrix(), 2, &cfg).unwrap();
        let ax = conjugate(&v, &px).unwrap();
        let bz = conjugate(&u, &pz).unwrap();
        crate::states::DensityMatrix::new(ax, &cfg).unwrap();
        crate::states::DensityMatrix::new(bz, &cfg).unwrap();
    }

    #[test]
    fn witness_trace_identity() {
        let cfg = cfg();
        let (x, z) = mixed_pair(0.47).unwrap();
        let overlap = matmul(x.matrix(), z.matrix()).unwrap().trace().re;
        for n in [1u32, 2, 3] {
            let w = tensor_power_witness(&x, &z, n, &cfg).unwrap();
            let tr = w.to_dense(&cfg).unwrap().trace();
            assert!((tr.re - 2.0 * overlap.powi(n as i32)).abs() < 1e-9);
            assert!(tr.im.abs() < 1e-12);
        }

        // Correlated: trace of J equals 2 tr[(conjugated X power)(conjugated
        // Z power)] by construction; check against the explicit product.
        let w = correlated_witness(&x, &z, 3, &cfg).unwrap();
        let (u, v) = correlating_unitaries(3, &cfg).unwrap();
        let ax = conjugate(&v, &tensor_power(x.matrix(), 3, &cfg).unwrap()).unwrap();
        let bz = conjugate(&u, &tensor_power(z.matrix(), 3, &cfg).unwrap()).unwrap();
        let prod_tr = matmul(&ax, &bz).unwrap().trace().re;
        let tr = w.to_dense(&cfg).unwrap().trace().re;
        assert!((tr - 2.0 * prod_tr).abs() < 1e-9);
    }

    #[test]
    fn rejects_mismatched_and_degenerate_inputs() {
        let cfg = cfg();
        let qubit = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)], &cfg).unwrap();
        let qutrit = pure_state(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], &cfg).unwrap();
        assert!(matches!(
            anticommutator_witness(&qubit, &qutrit, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(tensor_power_witness(&qubit, &qubit, 0, &cfg).is_err());
        assert!(matches!(
            correlated_witness(&qutrit, &qutrit, 2, &cfg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn family_labels_round_trip() {
        for f in [
            WitnessFamily::Plain,
            WitnessFamily::TensorPower,
            WitnessFamily::Correlated,
        ] {
            let parsed: WitnessFamily = f.as_str().parse().unwrap();
            assert_eq!(parsed, f);
        }
        assert!("bogus".parse::<WitnessFamily>().is_err());
    }
}
