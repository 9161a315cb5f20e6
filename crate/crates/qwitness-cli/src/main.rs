//! `qwitness`: reproducible experiments on the anticommutator witness.
//!
//! Four subcommands: `witness-check` evaluates one quantumness verdict,
//! `sweep` locates critical mixedness over a range of copy counts, `fit`
//! models a sweep table as a cubic in 1/n and extrapolates the copies needed
//! for a target, and `circuit-sim` runs the SHIFT-circuit moment estimation
//! with optional spectrum reconstruction.
//!
//! Identical configuration and seed produce byte-identical output, and every
//! record carries the tool version plus a hash of the configuration that
//! produced it. A quantum-vs-classical verdict is data, never an error: exit
//! codes are 0 for a completed run, 2 for unusable arguments or inputs, 1
//! for a computation that failed underway.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qwitness::circuit::{
    moments, spectrum_from_powers, witness_power_traces, CircuitEvaluation, SpectrumResult,
};
use qwitness::config::NumericConfig;
use qwitness::criticality::{
    extrapolate_n_required, fit_inverse_poly, io as sweep_io, sweep, Extrapolation, FitResult,
    SweepOutcome, SweepSettings,
};
use qwitness::states::mixed_pair;
use qwitness::witness::{
    anticommutator_witness, assess_with, correlated_witness, tensor_power_witness,
    QuantumnessVerdict, WitnessFamily,
};

const TOOL: &str = "qwitness";
const SCHEMA_VERSION: u32 = 1;
const DIM_CAP_VAR: &str = "QWITNESS_DIM_CAP";

#[derive(Parser)]
#[command(
    name = TOOL,
    version,
    about = "Anticommutator quantumness witness experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the witness for one (family, n, p) and report the verdict.
    WitnessCheck(WitnessCheckArgs),
    /// Critical mixedness p_c for n = 1..n_max, as a CSV or JSON table.
    Sweep(SweepArgs),
    /// Fit a sweep table with c0 + c1/n + c2/n^2 + c3/n^3 and extrapolate.
    Fit(FitArgs),
    /// SHIFT-circuit moments, optionally sampled, plus spectrum recovery.
    CircuitSim(CircuitSimArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyArg {
    Plain,
    TensorPower,
    Correlated,
}

impl From<FamilyArg> for WitnessFamily {
    fn from(arg: FamilyArg) -> WitnessFamily {
        match arg {
            FamilyArg::Plain => WitnessFamily::Plain,
            FamilyArg::TensorPower => WitnessFamily::TensorPower,
            FamilyArg::Correlated => WitnessFamily::Correlated,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct WitnessCheckArgs {
    /// Witness construction to evaluate.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Copy count; `plain` is single-copy by definition.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Mixedness parameter of the state pair.
    #[arg(long)]
    p: f64,
    /// An eigenvalue below -tol counts as negative.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// Family to sweep.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Sweep covers n = 1..=n_max.
    #[arg(long, default_value_t = 10)]
    n_max: u32,
    /// Fixed bisection resolution for every n
    /// (default policy: 1e-6 up to n = 8, then 1e-4).
    #[arg(long)]
    resolution: Option<f64>,
    /// Table format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Additionally write a two-column `n,p_c` file for plotting.
    #[arg(long)]
    #[serde(skip)]
    plot_output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// Sweep CSV table, as written by `qwitness sweep --format csv`.
    #[arg(long)]
    input: PathBuf,
    /// Mixedness target; reports the smallest n with model(n) < target.
    #[arg(long)]
    target: Option<f64>,
    /// Zero the fitted asymptote before extrapolating. Applied automatically
    /// for the correlated family, whose asymptote is compatible with zero.
    #[arg(long, default_value_t = false)]
    zero_c0: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CircuitSimArgs {
    /// Mixedness parameter of the state pair the circuit measures.
    #[arg(long)]
    p: f64,
    /// Moments j_l are evaluated for l = 1..=max_l.
    #[arg(long, default_value_t = 4)]
    max_l: u32,
    /// Shots per moment for the sampled estimate; 0 keeps exact values only.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// Seed for shot sampling; fixed seed, fixed output.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Reconstruct the witness spectrum from its power traces.
    #[arg(long, default_value_t = false)]
    spectrum: bool,
    /// Embedding dimension for the reconstruction; 4 covers a qubit witness
    /// with its two structural zeros, 2 restricts to the nonzero block.
    #[arg(long, default_value_t = 4)]
    spectrum_dim: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<qwitness::Error> for Failure {
    fn from(err: qwitness::Error) -> Failure {
        use qwitness::Error as E;
        let text = err.to_string();
        match err {
            E::ParamRange { .. }
            | E::DimensionCap { .. }
            | E::BadEntryCount { .. }
            | E::TooFewRecords { .. }
            | E::Unsupported(_)
            | E::Parse(_) => Failure::Usage(text),
            _ => Failure::Compute(text),
        }
    }
}

/// Everything hashed into `config_hash`: the subcommand, its parameters, and
/// the effective dimension cap. Serialization order is the declaration
/// order, so the hash is stable.
#[derive(Serialize)]
struct HashedConfig<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    dim_cap: usize,
}

fn config_hash<A: Serialize>(command: &str, args: &A, dim_cap: usize) -> String {
    let config = HashedConfig {
        command,
        args,
        dim_cap,
    };
    let canonical =
        serde_json::to_string(&config).expect("flag structs always serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

#[derive(Serialize)]
struct Envelope<P: Serialize> {
    schema_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    command: &'static str,
    config_hash: String,
    #[serde(flatten)]
    payload: P,
}

fn envelope<P: Serialize>(command: &'static str, config_hash: String, payload: P) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash,
        payload,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("payloads always serialize");
    text.push('\n');
    text
}

fn numeric_config() -> Result<NumericConfig<f64>, Failure> {
    // Sweeps at large copy counts dominate this tool's runtime; hand anything
    // past dimension 64 to the matrix-free solver (the two agree to 1e-8,
    // which is far below every tolerance used here).
    let mut cfg = NumericConfig {
        dense_crossover: 64,
        ..NumericConfig::default()
    };
    match std::env::var(DIM_CAP_VAR) {
        Ok(raw) => {
            let cap: usize = raw.trim().parse().map_err(|_| {
                Failure::Usage(format!(
                    "{DIM_CAP_VAR} must be a positive integer, got {raw:?}"
                ))
            })?;
            if cap == 0 {
                return Err(Failure::Usage(format!("{DIM_CAP_VAR} must be >= 1")));
            }
            cfg.dim_cap = cap;
        }
        Err(std::env::VarError::NotPresent) => {}
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(Failure::Usage(format!("{DIM_CAP_VAR} is not valid UTF-8")));
        }
    }
    Ok(cfg)
}

fn write_out(target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(path) => fs::write(path, text).map_err(|err| {
            Failure::Compute(format!("cannot write {}: {err}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|err| Failure::Compute(format!("cannot write stdout: {err}")))
        }
    }
}

#[derive(Serialize)]
struct WitnessCheckPayload {
    family: WitnessFamily,
    n: u32,
    p: f64,
    verdict: QuantumnessVerdict<f64>,
}

fn cmd_witness_check(args: &WitnessCheckArgs) -> Result<(), Failure> {
    let cfg = numeric_config()?;
    let hash = config_hash("witness-check", args, cfg.dim_cap);
    let family = WitnessFamily::from(args.family);
    if family == WitnessFamily::Plain && args.n != 1 {
        return Err(Failure::Usage(
            "the plain witness is single-copy; use --family tensor-power or correlated for n > 1"
                .to_string(),
        ));
    }
    let (rho_x, rho_z) = mixed_pair(args.p)?;
    let witness = match family {
        WitnessFamily::Plain => anticommutator_witness(&rho_x, &rho_z, &cfg)?,
        WitnessFamily::TensorPower => tensor_power_witness(&rho_x, &rho_z, args.n, &cfg)?,
        WitnessFamily::Correlated => correlated_witness(&rho_x, &rho_z, args.n, &cfg)?,
    };
    let verdict = assess_with(&witness, args.tol, &cfg)?;
    let payload = WitnessCheckPayload {
        family,
        n: args.n,
        p: args.p,
        verdict,
    };
    write_out(
        args.output.as_deref(),
        &envelope("witness-check", hash, payload),
    )
}

#[derive(Serialize)]
struct SweepPayload {
    family: WitnessFamily,
    n_max: u32,
    resolution_low_n: f64,
    resolution_high_n: f64,
    switch_n: u32,
    #[serde(flatten)]
    outcome: SweepOutcome<f64>,
}

fn sweep_csv(
    outcome: &SweepOutcome<f64>,
    config_hash: &str,
    tool_version: &str,
) -> Result<String, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = sweep_io::SWEEP_CSV_COLUMNS.to_vec();
    header.push("config_hash");
    header.push("tool_version");
    writer
        .write_record(&header)
        .map_err(|err| Failure::Compute(err.to_string()))?;

    enum Row<'a> {
        Ok(&'a qwitness::criticality::SweepRecord<f64>),
        Failed(&'a qwitness::criticality::SweepFailure),
    }
    let mut rows: Vec<(u32, Row<'_>)> = outcome
        .records
        .iter()
        .map(|r| (r.n, Row::Ok(r)))
        .chain(outcome.failures.iter().map(|f| (f.n, Row::Failed(f))))
        .collect();
    rows.sort_by_key(|(n, _)| *n);
    for (_, row) in rows {
        let record: Vec<String> = match row {
            Row::Ok(r) => vec![
                r.family.as_str().to_string(),
                r.n.to_string(),
                format!("{}", r.p_c),
                format!("{}", r.resolution),
                format!("{}", r.min_eig_lo),
                format!("{}", r.min_eig_hi),
                "ok".to_string(),
                config_hash.to_string(),
                tool_version.to_string(),
            ],
            Row::Failed(f) => vec![
                f.family.as_str().to_string(),
                f.n.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("failed: {}", f.reason),
                config_hash.to_string(),
                tool_version.to_string(),
            ],
        };
        writer
            .write_record(&record)
            .map_err(|err| Failure::Compute(err.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|err| Failure::Compute(err.to_string()))?;
    String::from_utf8(bytes).map_err(|err| Failure::Compute(err.to_string()))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = numeric_config()?;
    let hash = config_hash("sweep", args, cfg.dim_cap);
    let mut settings = SweepSettings::default();
    if let Some(resolution) = args.resolution {
        if !(resolution > 0.0 && resolution < 1.0) {
            return Err(Failure::Usage(format!(
                "--resolution must lie in (0, 1), got {resolution}"
            )));
        }
        settings.resolution_low_n = resolution;
        settings.resolution_high_n = resolution;
    }
    if args.n_max == 0 {
        return Err(Failure::Usage("--n-max must be >= 1".to_string()));
    }
    let outcome = sweep(WitnessFamily::from(args.family), args.n_max, &cfg, &settings);

    if let Some(plot_path) = &args.plot_output {
        let mut buf = Vec::new();
        sweep_io::sweep_to_plot(&outcome.records, &mut buf)
            .map_err(|err| Failure::Compute(err.to_string()))?;
        fs::write(plot_path, buf).map_err(|err| {
            Failure::Compute(format!("cannot write {}: {err}", plot_path.display()))
        })?;
    }

    let text = match args.format {
        OutputFormat::Csv => sweep_csv(&outcome, &hash, env!("CARGO_PKG_VERSION"))?,
        OutputFormat::Json => {
            let payload = SweepPayload {
                family: WitnessFamily::from(args.family),
                n_max: args.n_max,
                resolution_low_n: settings.resolution_low_n,
                resolution_high_n: settings.resolution_high_n,
                switch_n: settings.switch_n,
                outcome,
            };
            envelope("sweep", hash.clone(), payload)
        }
    };
    write_out(args.output.as_deref(), &text)
}

#[derive(Serialize)]
struct FitPayload {
    family: WitnessFamily,
    fit: FitResult<f64>,
    /// True when the asymptote was zeroed before extrapolation.
    c0_zeroed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extrapolation: Option<Extrapolation<f64>>,
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let cfg = numeric_config()?;
    let hash = config_hash("fit", args, cfg.dim_cap);
    let text = fs::read_to_string(&args.input).map_err(|err| {
        Failure::Usage(format!("cannot read {}: {err}", args.input.display()))
    })?;
    let outcome = sweep_io::sweep_from_csv::<f64, _>(text.as_bytes())?;
    if outcome.records.is_empty() {
        return Err(Failure::Usage(format!(
            "{} contains no successful sweep rows",
            args.input.display()
        )));
    }
    let family = outcome.records[0].family;
    if outcome.records.iter().any(|r| r.family != family) {
        return Err(Failure::Usage(
            "sweep table mixes witness families; fit one family at a time".to_string(),
        ));
    }
    let fit = fit_inverse_poly(&outcome.records)?;
    let c0_zeroed = args.zero_c0 || family == WitnessFamily::Correlated;
    let model = if c0_zeroed {
        fit.with_c0_zeroed()
    } else {
        fit.clone()
    };
    let extrapolation = match args.target {
        Some(target) => Some(extrapolate_n_required(&model, target)?),
        None => None,
    };
    let payload = FitPayload {
        family,
        fit,
        c0_zeroed,
        target: args.target,
        extrapolation,
    };
    write_out(args.output.as_deref(), &envelope("fit", hash, payload))
}

#[derive(Serialize)]
struct CircuitSimPayload {
    p: f64,
    max_l: u32,
    shots: u64,
    seed: u64,
    /// moments[l - 1] = j_l = tr[(rho_X rho_Z)^l], exact values.
    moments: Vec<f64>,
    evaluations: Vec<CircuitEvaluation<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_power_traces: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<SpectrumResult<f64>>,
}

fn cmd_circuit_sim(args: &CircuitSimArgs) -> Result<(), Failure> {
    let cfg = numeric_config()?;
    let hash = config_hash("circuit-sim", args, cfg.dim_cap);
    let (rho_x, rho_z) = mixed_pair(args.p)?;
    let result = moments(&rho_x, &rho_z, args.max_l, args.shots, args.seed, &cfg)?;
    let (traces, spectrum) = if args.spectrum {
        let traces =
            witness_power_traces(&rho_x, &rho_z, args.spectrum_dim as u32, &cfg)?;
        let spectrum = spectrum_from_powers(&traces, args.spectrum_dim)?;
        (Some(traces), Some(spectrum))
    } else {
        (None, None)
    };
    let payload = CircuitSimPayload {
        p: args.p,
        max_l: args.max_l,
        shots: args.shots,
        seed: args.seed,
        moments: result.moments.values,
        evaluations: result.evaluations,
        witness_power_traces: traces,
        spectrum,
    };
    write_out(
        args.output.as_deref(),
        &envelope("circuit-sim", hash, payload),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::WitnessCheck(args) => cmd_witness_check(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::CircuitSim(args) => cmd_circuit_sim(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
