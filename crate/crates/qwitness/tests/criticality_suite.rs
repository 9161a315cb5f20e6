//! Critical-point search invariants, fit quality, extrapolation arithmetic,
//! and the CSV/plot serialization contract.

use qwitness::config::NumericConfig;
use qwitness::criticality::{
    critical_p, extrapolate_n_required, fit_inverse_poly, io, sweep, Extrapolation, FitResult,
    SweepRecord, SweepSettings,
};
use qwitness::witness::WitnessFamily;

fn cfg() -> NumericConfig<f64> {
    NumericConfig::default()
}

#[test]
fn brackets_straddle_the_sign_change() {
    let cfg = cfg();
    let settings = SweepSettings::default();
    let cases = [
        (WitnessFamily::TensorPower, 5u32),
        (WitnessFamily::Correlated, 4u32),
    ];
    for (family, n_max) in cases {
        let outcome = sweep(family, n_max, &cfg, &settings);
        assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
        assert_eq!(outcome.records.len(), n_max as usize);
        for rec in &outcome.records {
            // Below p_c the witness is PSD, above it the smallest eigenvalue
            // is negative; the final bracket must preserve that ordering.
            assert!(
                rec.min_eig_lo >= -cfg.psd_tol,
                "n = {}: low edge already negative ({})",
                rec.n,
                rec.min_eig_lo
            );
            assert!(
                rec.min_eig_hi < -cfg.psd_tol,
                "n = {}: high edge not negative ({})",
                rec.n,
                rec.min_eig_hi
            );
            let bound = (1.0 / rec.resolution).log2().ceil() as u32;
            assert!(
                rec.iterations <= bound,
                "n = {}: {} bisection steps exceeds bound {bound}",
                rec.n,
                rec.iterations
            );
        }
    }
}

#[test]
fn critical_point_is_monotone_in_copies() {
    let cfg = cfg();
    let settings = SweepSettings::default();
    let outcome = sweep(WitnessFamily::TensorPower, 6, &cfg, &settings);
    let ps: Vec<f64> = outcome.records.iter().map(|r| r.p_c).collect();
    for pair in ps.windows(2) {
        assert!(pair[1] < pair[0], "p_c must strictly decrease: {ps:?}");
    }
}

fn synthetic_records(coeffs: [f64; 4], n_max: u32, jitter: f64) -> Vec<SweepRecord<f64>> {
    (1..=n_max)
        .map(|n| {
            let u = 1.0 / f64::from(n);
            let model = coeffs[0] + coeffs[1] * u + coeffs[2] * u * u + coeffs[3] * u * u * u;
            let wiggle = jitter * if n % 2 == 0 { 1.0 } else { -1.0 };
            SweepRecord {
                family: WitnessFamily::TensorPower,
                n,
                p_c: model + wiggle,
                resolution: 1e-6,
                iterations: 0,
                min_eig_lo: 0.0,
                min_eig_hi: -1e-6,
            }
        })
        .collect()
}

#[test]
fn fit_recovers_known_coefficients_through_noise() {
    let coeffs = [0.21, 1.9, -2.7, 1.3];
    let records = synthetic_records(coeffs, 10, 1e-6);
    let fit = fit_inverse_poly(&records).unwrap();
    for (got, want) in fit.coefficients.iter().zip(coeffs.iter()) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert!(fit.residual_rms < 3e-6);
    assert_eq!(fit.n_min, 1);
    assert_eq!(fit.n_max, 10);
}

#[test]
fn reference_coefficients_reproduce_small_n_critical_points() {
    // Published cubic fit for the tensor-power family; consistency demand is
    // rms < 0.01 against the n = 2, 3 critical points.
    let fit = FitResult {
        family: WitnessFamily::TensorPower,
        coefficients: [0.204, 1.882, -2.660, 1.281],
        residual_rms: 0.0,
        n_min: 1,
        n_max: 10,
    };
    let targets = [(2.0, 0.644), (3.0, 0.578)];
    let mut sq = 0.0;
    for (n, want) in targets {
        let got = fit.evaluate(n);
        sq += (got - want) * (got - want);
    }
    let rms = (sq / targets.len() as f64).sqrt();
    assert!(rms < 0.01, "rms = {rms}");
}

#[test]
fn extrapolation_examples() {
    let pure_decay = FitResult {
        family: WitnessFamily::Correlated,
        coefficients: [0.0, 1.35, 0.0, 0.0],
        residual_rms: 0.0,
        n_min: 1,
        n_max: 10,
    };
    match extrapolate_n_required(&pure_decay, 1e-5).unwrap() {
        Extrapolation::Reached { n_required, .. } => {
            assert!((n_required as i64 - 135_000).abs() <= 1, "{n_required}")
        }
        other => panic!("expected Reached, got {other:?}"),
    }

    let linear = FitResult {
        family: WitnessFamily::Correlated,
        coefficients: [0.0, 1.0, 0.0, 0.0],
        residual_rms: 0.0,
        n_min: 1,
        n_max: 10,
    };
    match extrapolate_n_required(&linear, 0.5).unwrap() {
        // 1/2 is not strictly below the target 0.5; three copies are needed.
        Extrapolation::Reached { n_required, .. } => assert_eq!(n_required, 3),
        other => panic!("expected Reached, got {other:?}"),
    }

    let saturating: FitResult<f64> = FitResult {
        family: WitnessFamily::TensorPower,
        coefficients: [0.204, 1.882, -2.660, 1.281],
        residual_rms: 0.0,
        n_min: 1,
        n_max: 10,
    };
    match extrapolate_n_required(&saturating, 1e-5).unwrap() {
        Extrapolation::Unreachable { asymptote } => {
            assert!((asymptote - 0.204).abs() < 1e-12)
        }
        other => panic!("expected Unreachable, got {other:?}"),
    }
}

#[test]
fn required_copies_grow_as_the_target_shrinks() {
    let fit = FitResult {
        family: WitnessFamily::Correlated,
        coefficients: [0.0, 1.35, -0.2, 0.05],
        residual_rms: 0.0,
        n_min: 1,
        n_max: 10,
    };
    let mut last = 0u64;
    for target in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        match extrapolate_n_required(&fit, target).unwrap() {
            Extrapolation::Reached { n_required, .. } => {
                assert!(n_required >= last);
                last = n_required;
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(last > 1_000_000);
}

#[test]
fn csv_round_trip_preserves_records_and_failures() {
    let cfg = cfg();
    let settings = SweepSettings::default();
    let mut outcome = sweep(WitnessFamily::TensorPower, 4, &cfg, &settings);
    outcome.failures.push(qwitness::criticality::SweepFailure {
        family: WitnessFamily::TensorPower,
        n: 99,
        reason: "synthetic failure, with a comma".to_string(),
    });

    let mut buf = Vec::new();
    io::sweep_to_csv(&outcome, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("family,n,p_c,resolution,min_eig_lo,min_eig_hi,status"));

    let back = io::sweep_from_csv::<f64, _>(&buf[..]).unwrap();
    assert_eq!(back.records.len(), outcome.records.len());
    for (a, b) in back.records.iter().zip(outcome.records.iter()) {
        assert_eq!(a.n, b.n);
        assert_eq!(a.family, b.family);
        assert!((a.p_c - b.p_c).abs() < 1e-15);
        assert!((a.min_eig_lo - b.min_eig_lo).abs() < 1e-15);
        assert!((a.min_eig_hi - b.min_eig_hi).abs() < 1e-15);
    }
    assert_eq!(back.failures.len(), 1);
    assert_eq!(back.failures[0].n, 99);
    assert!(back.failures[0].reason.contains("comma"));
}

#[test]
fn csv_reader_tolerates_extra_columns() {
    // Downstream tools append provenance columns; the reader keys on header
    // names and must not care.
    let text = "family,n,p_c,resolution,min_eig_lo,min_eig_hi,status,config_hash,tool_version\n\
                tensor-power,2,0.6435943,0.000001,0.0000004,-0.0000006,ok,deadbeef,0.1.0\n";
    let outcome = io::sweep_from_csv::<f64, _>(text.as_bytes()).unwrap();
    assert_eq!(outcome.records.len(), 1);
    let rec = &outcome.records[0];
    assert_eq!(rec.n, 2);
    assert_eq!(rec.family, WitnessFamily::TensorPower);
    assert!((rec.p_c - 0.6435943).abs() < 1e-12);
}

#[test]
fn plot_file_is_two_columns_sorted_by_n() {
    let records = synthetic_records([0.2, 1.0, 0.0, 0.0], 3, 0.0);
    let mut shuffled = records.clone();
    shuffled.reverse();
    let mut buf = Vec::new();
    io::sweep_to_plot(&shuffled, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p_c");
    assert_eq!(lines.len(), 4);
    for (i, line) in lines[1..].iter().enumerate() {
        let mut parts = line.split(',');
        assert_eq!(parts.next().unwrap(), format!("{}", i + 1));
        let p: f64 = parts.next().unwrap().parse().unwrap();
        assert!(p > 0.0 && p < 1.5);
    }
}

#[test]
fn resolution_policy_loosens_for_large_n() {
    let settings: SweepSettings<f64> = SweepSettings::default();
    assert_eq!(settings.resolution_for(8), 1e-6);
    assert_eq!(settings.resolution_for(9), 1e-4);
    let rec = critical_p(WitnessFamily::Plain, 1, 1e-3, &cfg(), &settings).unwrap();
    assert!((rec.p_c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    assert!(rec.resolution == 1e-3);
}
