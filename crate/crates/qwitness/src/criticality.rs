//! Critical mixedness sweeps and the inverse-polynomial model.
//!
//! For each witness family and copy count n there is a threshold p_c above
//! which the witness acquires a negative eigenvalue. `critical_p` locates it
//! by a coarse scan for the first sign change followed by bisection;
//! `sweep` collects thresholds for n = 1..n_max; `fit_inverse_poly` fits
//! p_c(n) = c0 + c1/n + c2/n^2 + c3/n^3; `extrapolate_n_required` inverts
//! the model to find the copy count that drives p_c below a target.

use serde::{Deserialize, Serialize};

use crate::config::NumericConfig;
use crate::error::{Error, Result};
use crate::states::mixed_pair;
use crate::witness::{
    assess_with, correlated_witness, tensor_power_witness, WitnessFamily, WitnessOperator,
};
use crate::Scalar;

/// One located critical point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord<T> {
    pub family: WitnessFamily,
    pub n: u32,
    pub p_c: T,
    pub resolution: T,
    pub iterations: u32,
    /// Smallest witness eigenvalue at the PSD end of the final bracket.
    pub min_eig_lo: T,
    /// Smallest witness eigenvalue at the non-PSD end of the final bracket.
    pub min_eig_hi: T,
}

/// A sweep point that could not be located.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub family: WitnessFamily,
    pub n: u32,
    pub reason: String,
}

/// Records plus per-point failures; a failed point never aborts the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutcome<T> {
    pub records: Vec<SweepRecord<T>>,
    pub failures: Vec<SweepFailure>,
}

impl<T> Default for SweepOutcome<T> {
    fn default() -> Self {
        SweepOutcome {
            records: Vec::new(),
            failures: Vec::new(),
        }
    }
}

/// Scan and resolution policy for sweeps.
#[derive(Debug, Clone)]
pub struct SweepSettings<T> {
    /// Bisection resolution for n up to `switch_n`.
    pub resolution_low_n: T,
    /// Looser resolution above `switch_n`, keeping large-n sweeps bounded.
    pub resolution_high_n: T,
    pub switch_n: u32,
    /// Points in the initial sign-change scan over [0, 1] (>= 2).
    pub scan_points: u32,
}

impl<T: Scalar> Default for SweepSettings<T> {
    fn default() -> Self {
        SweepSettings {
            resolution_low_n: T::from_f64c(1e-6),
            resolution_high_n: T::from_f64c(1e-4),
            switch_n: 8,
            scan_points: 33,
        }
    }
}

impl<T: Scalar> SweepSettings<T> {
    pub fn resolution_for(&self, n: u32) -> T {
        if n <= self.switch_n {
            self.resolution_low_n
        } else {
            self.resolution_high_n
        }
    }
}

fn family_witness<T: Scalar>(
    family: WitnessFamily,
    p: T,
    n: u32,
    cfg: &NumericConfig<T>,
) -> Result<WitnessOperator<T>> {
    let (x, z) = mixed_pair(p)?;
    match family {
        // A plain witness swept at n > 1 means the n-copy tensor power; at
        // n = 1 the two constructions coincide exactly.
        WitnessFamily::Plain | WitnessFamily::TensorPower => {
            tensor_power_witness(&x, &z, n, cfg)
        }
        WitnessFamily::Correlated => correlated_witness(&x, &z, n, cfg),
    }
}

/// Critical mixedness for one (family, n): smallest eigenvalue of the
/// witness changes sign at p_c. The search scans a coarse grid for the first
/// sign change, then bisects that bracket to the requested resolution.
pub fn critical_p<T: Scalar>(
    family: WitnessFamily,
    n: u32,
    resolution: T,
    cfg: &NumericConfig<T>,
    settings: &SweepSettings<T>,
) -> Result<SweepRecord<T>> {
    if !(resolution > T::zero() && resolution < T::one()) {
        return Err(Error::ParamRange {
            name: "resolution",
            value: resolution.as_f64(),
            expected: "0 < resolution < 1",
        });
    }
    let min_eig = |p: T| -> Result<T> {
        let w = family_witness(family, p, n, cfg)?;
        Ok(assess_with(&w, cfg.psd_tol, cfg)?.min_eigenvalue)
    };
    let negative = |e: T| e < -cfg.psd_tol;

    let family_name = family.as_str();
    let e_zero = min_eig(T::zero())?;
    if negative(e_zero) {
        return Err(Error::NoSignChange {
            family: family_name,
            n,
            detail: "witness is already non-PSD at p = 0".to_string(),
        });
    }
    let e_one = min_eig(T::one())?;
    if !negative(e_one) {
        return Err(Error::NoSignChange {
            family: family_name,
            n,
            detail: "witness stays PSD on all of [0, 1]".to_string(),
        });
    }

    // Coarse scan: first grid point where the witness has gone negative.
    // p = 1 is on the grid, so a bracket always exists.
    let points = settings.scan_points.max(2);
    let step = T::one() / T::from_f64c((points - 1) as f64);
    let (mut lo, mut e_lo) = (T::zero(), e_zero);
    let (mut hi, mut e_hi) = (T::one(), e_one);
    for k in 1..points {
        let p = if k == points - 1 {
            T::one()
        } else {
            step * T::from_f64c(k as f64)
        };
        let e = if k == points - 1 { e_one } else { min_eig(p)? };
        if negative(e) {
            hi = p;
            e_hi = e;
            break;
        }
        lo = p;
        e_lo = e;
    }

    let mut iterations = 0u32;
    while hi - lo > resolution {
        let mid = (lo + hi) * T::from_f64c(0.5);
        if mid <= lo || mid >= hi {
            break; // resolution below floating-point spacing
        }
        let e_mid = min_eig(mid)?;
        if negative(e_mid) {
            hi = mid;
            e_hi = e_mid;
        } else {
            lo = mid;
            e_lo = e_mid;
        }
        iterations += 1;
    }

    Ok(SweepRecord {
        family,
        n,
        p_c: (lo + hi) * T::from_f64c(0.5),
        resolution,
        iterations,
        min_eig_lo: e_lo,
        min_eig_hi: e_hi,
    })
}

/// Critical points for n = 1..n_max. Failures are collected, not fatal.
pub fn sweep<T: Scalar>(
    family: WitnessFamily,
    n_max: u32,
    cfg: &NumericConfig<T>,
    settings: &SweepSettings<T>,
) -> SweepOutcome<T> {
    let mut outcome = SweepOutcome::default();
    for n in 1..=n_max {
        let resolution = settings.resolution_for(n);
        match critical_p(family, n, resolution, cfg, settings) {
            Ok(record) => outcome.records.push(record),
            Err(err) => outcome.failures.push(SweepFailure {
                family,
                n,
                reason: err.to_string(),
            }),
        }
    }
    outcome
}

/// Cubic model in 1/n fitted to a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub family: WitnessFamily,
    /// c0 + c1/n + c2/n^2 + c3/n^3.
    pub coefficients: [T; 4],
    pub residual_rms: T,
    pub n_min: u32,
    pub n_max: u32,
}

impl<T: Scalar> FitResult<T> {
    pub fn evaluate(&self, n: T) -> T {
        let u = T::one() / n;
        let [c0, c1, c2, c3] = self.coefficients;
        ((c3 * u + c2) * u + c1) * u + c0
    }

    /// Same model with the constant term forced to zero; used when the
    /// fitted constant is statistically compatible with zero and the model
    /// must decay to arbitrarily small targets.
    pub fn with_c0_zeroed(&self) -> FitResult<T> {
        let mut out = self.clone();
        out.coefficients[0] = T::zero();
        out
    }
}

/// Uniform-weight least squares of p_c against {1, 1/n, 1/n^2, 1/n^3},
/// solved by Householder QR. Needs at least 5 records.
pub fn fit_inverse_poly<T: Scalar>(records: &[SweepRecord<T>]) -> Result<FitResult<T>> {
    if records.len() < 5 {
        return Err(Error::TooFewRecords {
            needed: 5,
            got: records.len(),
        });
    }
    let mut sorted: Vec<&SweepRecord<T>> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);

    let m = sorted.len();
    let mut basis = vec![T::zero(); m * 4];
    let mut rhs = vec![T::zero(); m];
    for (i, rec) in sorted.iter().enumerate() {
        let u = T::one() / T::from_f64c(rec.n as f64);
        basis[i * 4] = T::one();
        basis[i * 4 + 1] = u;
        basis[i * 4 + 2] = u * u;
        basis[i * 4 + 3] = u * u * u;
        rhs[i] = rec.p_c;
    }
    let coeffs = householder_lstsq(&mut basis, &mut rhs, m, 4)?;

    let fit = FitResult {
        family: sorted[0].family,
        coefficients: [coeffs[0], coeffs[1], coeffs[2], coeffs[3]],
        residual_rms: T::zero(),
        n_min: sorted.first().map(|r| r.n).unwrap_or(0),
        n_max: sorted.last().map(|r| r.n).unwrap_or(0),
    };
    let mut ss = T::zero();
    for rec in &sorted {
        let d = fit.evaluate(T::from_f64c(rec.n as f64)) - rec.p_c;
        ss += d * d;
    }
    let rms = (ss / T::from_f64c(m as f64)).sqrt();
    Ok(FitResult {
        residual_rms: rms,
        ..fit
    })
}

/// Least squares min ||A x - b|| for row-major A (m x k, m >= k), in place.
fn householder_lstsq<T: Scalar>(a: &mut [T], b: &mut [T], m: usize, k: usize) -> Result<Vec<T>> {
    let scale = a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    for col in 0..k {
        let mut norm_sq = T::zero();
        for row in col..m {
            norm_sq += a[row * k + col] * a[row * k + col];
        }
        let norm = norm_sq.sqrt();
        if norm <= T::epsilon() * T::from_f64c(m as f64) * scale.max(T::one()) {
            return Err(Error::RankDeficient);
        }
        let alpha = if a[col * k + col] >= T::zero() {
            -norm
        } else {
            norm
        };
        // v = x - alpha e1, stored in place of the column.
        a[col * k + col] -= alpha;
        let mut v_sq = T::zero();
        for row in col..m {
            v_sq += a[row * k + col] * a[row * k + col];
        }
        if v_sq <= T::zero() {
            return Err(Error::RankDeficient);
        }
        let two = T::from_f64c(2.0);
        for target in col + 1..k {
            let mut proj = T::zero();
            for row in col..m {
                proj += a[row * k + col] * a[row * k + target];
            }
            let f = two * proj / v_sq;
            for row in col..m {
                a[row * k + target] -= f * a[row * k + col];
            }
        }
        let mut proj = T::zero();
        for row in col..m {
            proj += a[row * k + col] * b[row];
        }
        let f = two * proj / v_sq;
        for row in col..m {
            b[row] -= f * a[row * k + col];
        }
        a[col * k + col] = alpha; // R diagonal
    }
    // Back substitution with the upper triangle of R.
    let mut x = vec![T::zero(); k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for j in col + 1..k {
            acc -= a[col * k + j] * x[j];
        }
        let r = a[col * k + col];
        if r.abs() <= T::epsilon() * T::from_f64c(m as f64) * scale.max(T::one()) {
            return Err(Error::RankDeficient);
        }
        x[col] = acc / r;
    }
    Ok(x)
}

/// Result of inverting the fitted model for a target threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Extrapolation<T> {
    /// Smallest copy count with model(n) strictly below the target.
    Reached { n_required: u64, model_value: T },
    /// The model never drops below the target; its n -> infinity limit.
    Unreachable { asymptote: T },
}

const N_SEARCH_CAP: u64 = 1 << 40;

/// Smallest integer n >= 1 with model(n) < p_target, or `Unreachable` when
/// the model's tail never crosses the target. The model is assumed to
/// decrease toward its asymptote for large n, which holds for every fit this
/// crate produces; a short backward walk guards mild non-monotonicity.
pub fn extrapolate_n_required<T: Scalar>(
    fit: &FitResult<T>,
    p_target: T,
) -> Result<Extrapolation<T>> {
    if !p_target.is_finite() || p_target <= T::zero() {
        return Err(Error::ParamRange {
            name: "p_target",
            value: p_target.as_f64(),
            expected: "finite and > 0",
        });
    }
    let value = |n: u64| fit.evaluate(T::from_f64c(n as f64));
    let below = |n: u64| value(n) < p_target;

    if below(1) {
        return Ok(Extrapolation::Reached {
            n_required: 1,
            model_value: value(1),
        });
    }
    // Exponential search for any n below target.
    let mut probe = 1u64;
    let found = loop {
        let next = probe.saturating_mul(2).min(N_SEARCH_CAP);
        if below(next) {
            break Some((probe, next));
        }
        if next == N_SEARCH_CAP {
            break None;
        }
        probe = next;
    };
    let (mut lo, mut hi) = match found {
        Some(bracket) => bracket,
        None => {
            return Ok(Extrapolation::Unreachable {
                asymptote: fit.coefficients[0],
            })
        }
    };
    // Invariant: !below(lo) && below(hi); narrow to the first crossing.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Guard against local wiggle: walk back while the predicate still holds.
    let mut n_required = hi;
    let mut steps = 0;
    while n_required > 1 && steps < 4096 && below(n_required - 1) {
        n_required -= 1;
        steps += 1;
    }
    Ok(Extrapolation::Reached {
        n_required,
        model_value: value(n_required),
    })
}

/// Sweep and fit serialization: CSV tables, plot files, JSON round-trips.
pub mod io {
    use std::io::{Read, Write};

    use super::{SweepFailure, SweepOutcome, SweepRecord};
    use crate::error::{Error, Result};
    use crate::Scalar;

    pub const SWEEP_CSV_COLUMNS: [&str; 7] = [
        "family",
        "n",
        "p_c",
        "resolution",
        "min_eig_lo",
        "min_eig_hi",
        "status",
    ];

    /// Writes records and failures merged in order of n. Successful rows
    /// carry `status = ok`; failed rows leave the numeric columns empty and
    /// put the reason in `status`.
    pub fn sweep_to_csv<T: Scalar, W: Write>(outcome: &SweepOutcome<T>, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SWEEP_CSV_COLUMNS)?;
        enum Row<'a, T> {
            Ok(&'a SweepRecord<T>),
            Failed(&'a SweepFailure),
        }
        let mut rows: Vec<(u32, Row<'_, T>)> = outcome
            .records
            .iter()
            .map(|r| (r.n, Row::Ok(r)))
            .chain(outcome.failures.iter().map(|f| (f.n, Row::Failed(f))))
            .collect();
        rows.sort_by_key(|(n, _)| *n);
        for (_, row) in rows {
            match row {
                Row::Ok(r) => w.write_record([
                    r.family.as_str().to_string(),
                    r.n.to_string(),
                    format_real(r.p_c),
                    format_real(r.resolution),
                    format_real(r.min_eig_lo),
                    format_real(r.min_eig_hi),
                    "ok".to_string(),
                ])?,
                Row::Failed(f) => w.write_record([
                    f.family.as_str().to_string(),
                    f.n.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("failed: {}", f.reason),
                ])?,
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a sweep table written by [`sweep_to_csv`]; tolerates extra
    /// trailing columns. Iteration counts are not stored in the CSV and come
    /// back as zero.
    pub fn sweep_from_csv<T: Scalar, R: Read>(reader: R) -> Result<SweepOutcome<T>> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("missing CSV column: {name}")))
        };
        let family_col = col("family")?;
        let n_col = col("n")?;
        let p_c_col = col("p_c")?;
        let resolution_col = col("resolution")?;
        let lo_col = col("min_eig_lo")?;
        let hi_col = col("min_eig_hi")?;
        let status_col = col("status")?;

        let mut outcome = SweepOutcome::default();
        for record in r.records() {
            let record = record?;
            let field = |idx: usize| -> Result<&str> {
                record
                    .get(idx)
                    .ok_or_else(|| Error::Parse("short CSV row".to_string()))
            };
            let family = field(family_col)?.parse()?;
            let n: u32 = field(n_col)?
                .parse()
                .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
            let status = field(status_col)?;
            if status == "ok" {
                let real = |idx: usize| -> Result<T> {
                    let raw = field(idx)?;
                    raw.parse::<f64>()
                        .map(T::from_f64c)
                        .map_err(|e| Error::Parse(format!("bad real {raw:?}: {e}")))
                };
                outcome.records.push(SweepRecord {
                    family,
                    n,
                    p_c: real(p_c_col)?,
                    resolution: real(resolution_col)?,
                    iterations: 0,
                    min_eig_lo: real(lo_col)?,
                    min_eig_hi: real(hi_col)?,
                });
            } else {
                outcome.failures.push(SweepFailure {
                    family,
                    n,
                    reason: status.to_string(),
                });
            }
        }
        Ok(outcome)
    }

    /// Two-column plot file: header line `n,p_c`, then one row per record.
    pub fn sweep_to_plot<T: Scalar, W: Write>(
        records: &[SweepRecord<T>],
        mut writer: W,
    ) -> Result<()> {
        let mut sorted: Vec<&SweepRecord<T>> = records.iter().collect();
        sorted.sort_by_key(|r| r.n);
        writeln!(writer, "n,p_c")?;
        for r in sorted {
            writeln!(writer, "{},{}", r.n, format_real(r.p_c))?;
        }
        Ok(())
    }

    fn format_real<T: Scalar>(v: T) -> String {
        // Shortest round-trip decimal form; stable across runs.
        format!("{}", v.as_f64())
    }
}
