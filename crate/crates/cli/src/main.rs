//! `prwcs`: two-photon interference of phase-randomized weak coherent
//! beams — closed-form rates, Monte Carlo click timelines, fringe scans and
//! fits.
//!
//! Exit codes: 0 on success, 2 for configuration or usage problems, 3 for
//! runtime failures.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

use prwcs_cli::config::RunSpec;
use prwcs_cli::emit;
use prwcs_cli::fit::{fit_cosine, FitResult};
use prwcs_cli::scan::{scan_phi, scan_rate, ScanMode};
use prwcs_core::quasiclassical::{mean_field, CoherentAmplitude, FieldScale};
use prwcs_core::{
    analytic_rates, bin_statistics, count_coincidences, quantum_classical_ratio, simulate_timeline,
    three_run_subtraction, AnalyticRates, BinStats, SubtractionResult, Tally,
};

#[derive(Parser)]
#[command(
    name = "prwcs",
    version,
    about = "Interference statistics of phase-randomized weak coherent beams carrying OAM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form singles and coincidence rates at one mismatch setting.
    Analytic {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate one click timeline and tally singles and coincidences.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Three-run protocol: both arms open, each arm alone, subtracted.
    Subtract {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep the mismatch angle, fit the fringe, report normalized counts.
    ScanPhi {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// simulate (Monte Carlo timelines) or analytic (expected counts).
        #[arg(long, value_enum, default_value = "simulate")]
        mode: Mode,
    },
    /// Closed-form coincidence curve against the detected singles rate.
    ScanRate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Lowest detected singles rate on the grid.
        #[arg(long, default_value_t = 1e4, value_name = "HZ")]
        min_hz: f64,
        /// Highest detected singles rate on the grid.
        #[arg(long, default_value_t = 4e6, value_name = "HZ")]
        max_hz: f64,
        /// Number of grid points, spaced geometrically.
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Field diagnostics of one phase-randomized weak beam.
    MeanField {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Mean photon number; defaults to the configured arm-a intensity.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Fit a fringe CSV (columns phi_deg, absolute_cc, stderr).
    Fit {
        /// CSV file, e.g. the output of scan-phi.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// OAM index of the fringe; defaults to 1.
        #[arg(long)]
        l: Option<i32>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Flags overriding fields of the JSON run specification.
#[derive(Args, Default)]
struct SpecArgs {
    /// JSON run specification; the flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base seed for every pseudo-random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Mismatch angle in degrees.
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    phi_deg: Option<f64>,
    /// OAM index imprinted on both arms; the monitor-port shift becomes -l.
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    /// Mean photons per coherence bin in arm a.
    #[arg(long, value_name = "MU", allow_negative_numbers = true)]
    mu_a: Option<f64>,
    /// Mean photons per coherence bin in arm b.
    #[arg(long, value_name = "MU", allow_negative_numbers = true)]
    mu_b: Option<f64>,
    /// Coincidence window in nanoseconds.
    #[arg(long, value_name = "NS", allow_negative_numbers = true)]
    window_ns: Option<f64>,
    /// Acquisition time per run in seconds.
    #[arg(long, value_name = "S", allow_negative_numbers = true)]
    duration_s: Option<f64>,
}

#[derive(Args, Default)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format; scans default to csv, everything else to json.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Simulate,
    Analytic,
}

impl From<Mode> for ScanMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Simulate => ScanMode::Simulate,
            Mode::Analytic => ScanMode::Analytic,
        }
    }
}

/// A failed invocation: what went wrong and which exit code it maps to.
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(error: E) -> Self {
        Failure {
            code: 3,
            error: error.into(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("error: {:#}", failure.error);
        std::process::exit(failure.code);
    }
}

/// Builds the effective run spec from an optional config file plus flag
/// overrides; every problem here is a configuration failure.
fn build_spec(args: &SpecArgs) -> Result<RunSpec, Failure> {
    let build = || -> anyhow::Result<RunSpec> {
        let mut spec = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let spec: RunSpec =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                spec
            }
            None => RunSpec::default(),
        };
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(deg) = args.phi_deg {
            spec.circuit.phi = deg.to_radians();
        }
        if let Some(l) = args.l {
            spec.circuit.l1 = l;
            spec.circuit.l2 = l;
            spec.circuit.l3 = -l;
        }
        if let Some(mu) = args.mu_a {
            spec.source.mu_a = mu;
        }
        if let Some(mu) = args.mu_b {
            spec.source.mu_b = mu;
        }
        if let Some(ns) = args.window_ns {
            spec.acquisition.window_s = ns * 1e-9;
        }
        if let Some(duration) = args.duration_s {
            spec.acquisition.duration_s = duration;
        }
        spec.validate()?;
        Ok(spec)
    };
    build().map_err(Failure::config)
}

/// Resolves the output format, rejecting csv for JSON-only reports.
fn resolve_format(output: &OutputArgs, default: Format, csv_allowed: bool) -> Result<Format, Failure> {
    let format = output.format.unwrap_or(default);
    if format == Format::Csv && !csv_allowed {
        return Err(Failure::config(anyhow::anyhow!(
            "this subcommand only emits json; drop --format csv"
        )));
    }
    Ok(format)
}

#[derive(Serialize)]
struct AnalyticReport {
    spec: RunSpec,
    per_bin: BinStats,
    rates: AnalyticRates,
}

#[derive(Serialize)]
struct SimulateReport {
    spec: RunSpec,
    tally: Tally,
    singles_hz: [f64; 2],
    coincidence_hz: f64,
}

#[derive(Serialize)]
struct SubtractReport {
    spec: RunSpec,
    result: SubtractionResult,
    absolute_hz: f64,
    standard_error_hz: f64,
}

#[derive(Serialize)]
struct MeanFieldReport {
    mu: f64,
    field_magnitude: f64,
    number_stddev: f64,
    quantum_classical_ratio: f64,
    /// Peak field expectation of the un-randomized coherent state, in units
    /// of the single-photon field.
    coherent_peak_field: f64,
    /// Field expectation after uniform phase randomization.
    phase_averaged_field: f64,
}

#[derive(Serialize)]
struct FitReport {
    input: String,
    l: i32,
    points: usize,
    fit: FitResult,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analytic { spec, output } => {
            let spec = build_spec(&spec)?;
            resolve_format(&output, Format::Json, false)?;
            let per_bin = bin_statistics(&spec.circuit, &spec.source, &spec.detector)?;
            let rates = analytic_rates(
                &spec.circuit,
                &spec.source,
                &spec.detector,
                spec.acquisition.window_s,
            )?;
            let report = AnalyticReport { spec, per_bin, rates };
            emit::write_output(output.out.as_deref(), &emit::to_json_string(&report)?)?;
        }
        Command::Simulate { spec, output } => {
            let spec = build_spec(&spec)?;
            resolve_format(&output, Format::Json, false)?;
            let clicks = simulate_timeline(
                &spec.circuit,
                &spec.source,
                &spec.detector,
                spec.acquisition.duration_s,
                spec.seed,
            )?;
            let counted = count_coincidences(&clicks, spec.acquisition.window_s)?;
            let tally = Tally {
                singles: counted.singles,
                coincidences: counted.pairs,
                duration_s: spec.acquisition.duration_s,
                window_s: spec.acquisition.window_s,
            };
            let report = SimulateReport {
                singles_hz: [
                    tally.singles_rate_hz(prwcs_core::DetectorId::D1),
                    tally.singles_rate_hz(prwcs_core::DetectorId::D2),
                ],
                coincidence_hz: tally.coincidence_rate_hz(),
                spec,
                tally,
            };
            emit::write_output(output.out.as_deref(), &emit::to_json_string(&report)?)?;
        }
        Command::Subtract { spec, output } => {
            let spec = build_spec(&spec)?;
            resolve_format(&output, Format::Json, false)?;
            let result = three_run_subtraction(
                &spec.circuit,
                &spec.source,
                &spec.detector,
                spec.acquisition.duration_s,
                spec.acquisition.window_s,
                spec.seed,
            )?;
            let report = SubtractReport {
                absolute_hz: result.absolute_rate_hz(),
                standard_error_hz: result.standard_error / spec.acquisition.duration_s,
                spec,
                result,
            };
            emit::write_output(output.out.as_deref(), &emit::to_json_string(&report)?)?;
        }
        Command::ScanPhi { spec, output, mode } => {
            let spec = build_spec(&spec)?;
            let format = resolve_format(&output, Format::Csv, true)?;
            let report = scan_phi(&spec, mode.into())?;
            let text = match format {
                Format::Csv => emit::scan_csv_string(&report)?,
                Format::Json => emit::to_json_string(&report)?,
            };
            emit::write_output(output.out.as_deref(), &text)?;
        }
        Command::ScanRate {
            spec,
            output,
            min_hz,
            max_hz,
            points,
        } => {
            let spec = build_spec(&spec)?;
            let format = resolve_format(&output, Format::Csv, true)?;
            let rows = scan_rate(&spec, min_hz, max_hz, points)?;
            let text = match format {
                Format::Csv => emit::rate_csv_string(&rows)?,
                Format::Json => emit::to_json_string(&rows)?,
            };
            emit::write_output(output.out.as_deref(), &text)?;
        }
        Command::MeanField { spec, output, mu } => {
            let spec = build_spec(&spec)?;
            resolve_format(&output, Format::Json, false)?;
            let mu = mu.unwrap_or(spec.source.mu_a);
            let alpha = CoherentAmplitude::from_mean(mu, 0.0)?;
            let scale = FieldScale::new(1.0, std::f64::consts::FRAC_PI_2)?;
            let report = MeanFieldReport {
                mu,
                field_magnitude: alpha.magnitude(),
                number_stddev: prwcs_core::number_stddev(mu)?,
                quantum_classical_ratio: quantum_classical_ratio(mu)?,
                coherent_peak_field: mean_field(&alpha, &scale),
                // A uniform phase average cancels the field expectation
                // exactly; only intensities survive.
                phase_averaged_field: 0.0,
            };
            emit::write_output(output.out.as_deref(), &emit::to_json_string(&report)?)?;
        }
        Command::Fit { input, l, output } => {
            let l = l.unwrap_or(1);
            if l == 0 {
                return Err(Failure::config(anyhow::anyhow!("--l must be nonzero")));
            }
            resolve_format(&output, Format::Json, false)?;
            let file = std::fs::File::open(&input)
                .with_context(|| format!("opening {}", input.display()))?;
            let rows = emit::read_fringe_csv(file)?;
            let phi_rad: Vec<f64> = rows.iter().map(|r| r.phi_deg.to_radians()).collect();
            let values: Vec<f64> = rows.iter().map(|r| r.absolute_cc).collect();
            let sigmas: Vec<f64> = rows.iter().map(|r| r.stderr.max(1.0)).collect();
            let fit = fit_cosine(l, &phi_rad, &values, &sigmas)?;
            let report = FitReport {
                input: input.display().to_string(),
                l,
                points: rows.len(),
                fit,
            };
            emit::write_output(output.out.as_deref(), &emit::to_json_string(&report)?)?;
        }
    }
    Ok(())
}
