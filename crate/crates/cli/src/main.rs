//! `faraday-ct`: runs the controlled-teleportation pipelines, checks the
//! bundled result tables and reports cavity phases and resource estimates.
//!
//! Machine-readable JSON goes to stdout (or `--output`), human summaries to
//! stderr. Exit codes: 0 success, 1 verification failure, 2 usage or
//! configuration error.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faraday_core::cavity::{faraday_phases, CavityParams, PhasePolicy};
use faraday_core::protocol::{
    build, bundled_errata, bundled_table, bundled_table_ids, run_with, verify_table, Errata,
    Family, Payload, ResultTable, RunOptions, RunResult, TableVerificationReport,
};
use faraday_core::resources::{
    expected_event_period, monte_carlo_yield, success_probability, LossModel, MonteCarloYield,
};
use faraday_core::{Outcome, PauliOp};
use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "faraday-ct",
    version,
    about = "Cavity-assisted controlled teleportation simulator"
)]
struct Cli {
    /// Directory searched for `<preset>.json` before the bundled presets.
    #[arg(long, global = true, env = "FARADAY_PRESET_DIR")]
    preset_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection phases and magnitudes for a cavity configuration.
    Phases(PhasesArgs),
    /// Run a protocol and report every branch (or a sampled trace).
    Run(RunArgs),
    /// Shorthand for `run --mode sample`.
    Sample(RunArgs),
    /// Check result tables against the simulated pipelines.
    VerifyTables(VerifyArgs),
    /// Success probability, event period and optional Monte Carlo check.
    Resources(ResourcesArgs),
}

#[derive(Args)]
struct CavityArgs {
    /// Cavity preset name.
    #[arg(long, default_value = "standard-tuning")]
    preset: String,
    /// Cavity parameters as a JSON file (overrides --preset).
    #[arg(long, value_name = "FILE")]
    cavity: Option<PathBuf>,
    #[arg(long)]
    omega_c: Option<f64>,
    #[arg(long = "omega-0")]
    omega_0: Option<f64>,
    #[arg(long)]
    omega_p: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Strict,
    Renormalize,
}

impl From<Policy> for PhasePolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Strict => PhasePolicy::Strict,
            Policy::Renormalize => PhasePolicy::Renormalize,
        }
    }
}

#[derive(Args)]
struct PhasesArgs {
    #[command(flatten)]
    cavity: CavityArgs,
    #[arg(long, value_enum, default_value = "strict")]
    policy: Policy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Enumerate,
    Sample,
}

#[derive(Args)]
struct RunArgs {
    /// ct-superposition, cpt-entangled or ct-entangled.
    #[arg(long)]
    protocol: Family,
    #[arg(long, default_value_t = 1)]
    controls: usize,
    /// Payload amplitude, e.g. `0.6`, `0.6+0.8i` or `random`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    beta: String,
    /// Seed for a random payload and for sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    cavity: CavityArgs,
    #[arg(long, value_enum, default_value = "enumerate")]
    mode: Mode,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    /// Write JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Allow more than two controls in the two-photon scheme.
    #[arg(long)]
    extended: bool,
    /// Do not reject wave plates that break the parity rule.
    #[arg(long)]
    no_parity_check: bool,
    #[arg(long, value_enum, default_value = "strict")]
    policy: Policy,
    /// Report uncorrectable branches instead of failing.
    #[arg(long)]
    allow_uncorrectable: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Bundled table id (repeatable); all bundled tables when omitted.
    #[arg(long = "table", value_name = "ID")]
    tables: Vec<String>,
    /// Table file to check instead of bundled tables (repeatable).
    #[arg(long = "file", value_name = "FILE")]
    files: Vec<PathBuf>,
    /// Errata allowlist to use instead of the bundled one.
    #[arg(long, value_name = "FILE", conflicts_with = "no_errata")]
    errata: Option<PathBuf>,
    /// Verify without any allowlist.
    #[arg(long)]
    no_errata: bool,
}

#[derive(Args)]
struct ResourcesArgs {
    /// Loss-model preset name.
    #[arg(long, default_value = "olmschenk-2009-like")]
    preset: String,
    /// Loss model as a JSON file (overrides --preset).
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Number of photon paths (overrides the model).
    #[arg(long)]
    paths: Option<u32>,
    /// Run a Monte Carlo check with this many trials.
    #[arg(long, value_name = "TRIALS")]
    monte_carlo: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Protocol simulated by the Monte Carlo check; defaults to the
    /// two-photon scheme for two paths and the single-atom scheme otherwise.
    #[arg(long)]
    protocol: Option<Family>,
}

struct Failure {
    code: u8,
    message: String,
}

fn config_error(e: impl Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

type CmdResult = Result<(), Failure>;

fn emit(value: &impl Serialize, output: Option<&Path>) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(config_error)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| config_error(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn preset_file(dir: Option<&Path>, name: &str) -> Option<PathBuf> {
    dir.map(|d| d.join(format!("{name}.json")))
        .filter(|p| p.is_file())
}

fn cavity_params(args: &CavityArgs, dir: Option<&Path>) -> Result<CavityParams, Failure> {
    let mut p = match (&args.cavity, preset_file(dir, &args.preset)) {
        (Some(file), _) => CavityParams::from_json_file(file),
        (None, Some(file)) => CavityParams::from_json_file(file),
        (None, None) => CavityParams::preset(&args.preset),
    }
    .map_err(config_error)?;
    let overrides = [
        (&mut p.omega_c, args.omega_c),
        (&mut p.omega_0, args.omega_0),
        (&mut p.omega_p, args.omega_p),
        (&mut p.kappa, args.kappa),
        (&mut p.gamma, args.gamma),
        (&mut p.lambda, args.lambda),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    p.validate().map_err(config_error)?;
    Ok(p)
}

#[derive(Serialize)]
struct PhaseReport {
    params: CavityParams,
    phi: f64,
    phi0: f64,
    theta_minus: f64,
    theta_plus: f64,
    mag: f64,
    mag0: f64,
    lossless: bool,
    policy: PhasePolicy,
    admitted: bool,
}

fn cmd_phases(args: &PhasesArgs, dir: Option<&Path>) -> CmdResult {
    let params = cavity_params(&args.cavity, dir)?;
    let ph = faraday_phases(&params).map_err(config_error)?;
    let policy: PhasePolicy = args.policy.into();
    let admitted = ph.admit(policy);
    eprintln!(
        "phi = {:.6}  phi0 = {:.6}  theta- = {:.6}  theta+ = {:.6}  |r| = {:.6}  |r0| = {:.6}",
        ph.phi,
        ph.phi0,
        ph.theta_minus(),
        ph.theta_plus(),
        ph.mag,
        ph.mag0
    );
    if let Err(e) = &admitted {
        eprintln!("warning: {e}");
    }
    emit(
        &PhaseReport {
            params,
            phi: ph.phi,
            phi0: ph.phi0,
            theta_minus: ph.theta_minus(),
            theta_plus: ph.theta_plus(),
            mag: ph.mag,
            mag0: ph.mag0,
            lossless: ph.is_lossless(),
            policy,
            admitted: admitted.is_ok(),
        },
        None,
    )
}

fn parse_amplitude(s: &str) -> Result<Complex64, Failure> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    compact
        .parse::<Complex64>()
        .map_err(|_| config_error(format!("cannot parse amplitude `{s}`")))
}

fn payload(args: &RunArgs) -> Result<Payload, Failure> {
    if args.alpha == "random" || args.beta == "random" {
        return Ok(Payload::random(&mut ChaCha8Rng::seed_from_u64(args.seed)));
    }
    Payload::new(parse_amplitude(&args.alpha)?, parse_amplitude(&args.beta)?).map_err(config_error)
}

#[derive(Serialize)]
struct SampleRecord {
    index: usize,
    outcome: Outcome,
    probability: f64,
    correction: Option<PauliOp>,
    corrected_payload_fidelity: f64,
}

#[derive(Serialize)]
struct SampleTrace {
    protocol: String,
    family: Family,
    n_controls: usize,
    payload: Payload,
    seed: u64,
    samples: Vec<SampleRecord>,
}

fn sample_trace(result: &RunResult, seed: u64, count: usize) -> Result<SampleTrace, Failure> {
    let weights =
        WeightedIndex::new(result.branches.iter().map(|b| b.probability)).map_err(config_error)?;
    // Stream 0 may have produced the payload; sampling uses its own stream.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let samples = (0..count)
        .map(|index| {
            let b = &result.branches[weights.sample(&mut rng)];
            SampleRecord {
                index,
                outcome: b.outcome.clone(),
                probability: b.probability,
                correction: b.correction.clone(),
                corrected_payload_fidelity: b.corrected_payload_fidelity,
            }
        })
        .collect();
    Ok(SampleTrace {
        protocol: result.protocol.clone(),
        family: result.family,
        n_controls: result.n_controls,
        payload: result.payload,
        seed,
        samples,
    })
}

fn cmd_run(args: &RunArgs, mode: Mode, dir: Option<&Path>) -> CmdResult {
    let params = cavity_params(&args.cavity, dir)?;
    let payload = payload(args)?;
    let spec = build(args.protocol, args.controls, payload, params, args.extended)
        .map_err(config_error)?;
    let opts = RunOptions {
        enforce_parity: !args.no_parity_check,
        phase_policy: args.policy.into(),
        require_correction: !args.allow_uncorrectable,
    };
    let result = run_with(&spec, &opts).map_err(config_error)?;
    let worst = result
        .branches
        .iter()
        .map(|b| b.corrected_payload_fidelity)
        .fold(1.0, f64::min);
    eprintln!(
        "{}: {} branches, success weight {:.6}, lowest corrected fidelity {:.12}",
        result.protocol,
        result.branches.len(),
        result.success_weight,
        worst
    );
    match mode {
        Mode::Enumerate => emit(&result, args.output.as_deref()),
        Mode::Sample => emit(
            &sample_trace(&result, args.seed, args.samples)?,
            args.output.as_deref(),
        ),
    }
}

fn load_errata(args: &VerifyArgs) -> Result<Errata, Failure> {
    if args.no_errata {
        return Ok(Errata::default());
    }
    match &args.errata {
        Some(path) => {
            let src = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            Errata::from_json_str(&src).map_err(config_error)
        }
        None => Ok(bundled_errata()),
    }
}

fn load_tables(args: &VerifyArgs) -> Result<Vec<ResultTable>, Failure> {
    let mut tables = Vec::new();
    for path in &args.files {
        let src = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        tables.push(
            ResultTable::from_json_str(&path.display().to_string(), &src).map_err(config_error)?,
        );
    }
    let ids: Vec<String> = if args.tables.is_empty() && args.files.is_empty() {
        bundled_table_ids().into_iter().map(String::from).collect()
    } else {
        args.tables.clone()
    };
    for id in ids {
        tables.push(bundled_table(&id).map_err(config_error)?);
    }
    Ok(tables)
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let errata = load_errata(args)?;
    let tables = load_tables(args)?;
    let reports = tables
        .iter()
        .map(|t| verify_table(t, &errata))
        .collect::<Result<Vec<TableVerificationReport>, _>>()
        .map_err(config_error)?;
    for r in &reports {
        eprintln!(
            "{}: {}/{} rows match, {} allowlisted, {} unlisted branches -> {}",
            r.table,
            r.rows_matched,
            r.rows_total,
            r.allowlisted_mismatches,
            r.uncovered.len(),
            if r.passed { "ok" } else { "FAILED" }
        );
        for row in r.rows.iter().filter(|row| !row.matches) {
            eprintln!(
                "  row {}{}: {}",
                row.row,
                if row.allowlisted { " (errata)" } else { "" },
                row.problems.join("; ")
            );
        }
    }
    emit(&reports, None)?;
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: "table verification failed".into(),
        })
    }
}

#[derive(Serialize)]
struct ResourceReport {
    model: LossModel,
    success_probability: f64,
    /// Seconds; `null` when nothing ever succeeds.
    expected_event_period_s: f64,
    expected_event_period_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloYield>,
}

fn cmd_resources(args: &ResourcesArgs, dir: Option<&Path>) -> CmdResult {
    let src = match (args.model.clone(), preset_file(dir, &args.preset)) {
        (Some(file), _) | (None, Some(file)) => Some(
            fs::read_to_string(&file)
                .map_err(|e| config_error(format!("cannot read {}: {e}", file.display())))?,
        ),
        (None, None) => None,
    };
    let mut model = match src {
        Some(s) => LossModel::from_json_str(&s),
        None => LossModel::preset(&args.preset),
    }
    .map_err(config_error)?;
    if let Some(n) = args.paths {
        model.n_photon_paths = n;
    }
    model.validate().map_err(config_error)?;
    let p = success_probability(&model);
    let period = expected_event_period(&model);
    eprintln!(
        "P = {p:.6e}, one event every {period:.4} s ({:.3} min)",
        period / 60.0
    );

    let monte_carlo = match args.monte_carlo {
        None => None,
        Some(trials) => {
            let family = args.protocol.unwrap_or(if model.n_photon_paths >= 2 {
                Family::CtEntangled
            } else {
                Family::CtSuperposition
            });
            let spec = build(
                family,
                1,
                Payload::basis_zero(),
                CavityParams::standard_tuning(),
                false,
            )
            .map_err(config_error)?;
            let y = monte_carlo_yield(&model, &spec, trials, args.seed).map_err(config_error)?;
            eprintln!(
                "Monte Carlo ({family}, {} path(s)): {}/{} = {:.4e}, z = {:.2}",
                y.photon_paths,
                y.successes,
                y.trials,
                y.empirical_rate,
                y.z_score()
            );
            Some(y)
        }
    };
    emit(
        &ResourceReport {
            model,
            success_probability: p,
            expected_event_period_s: period,
            expected_event_period_min: period / 60.0,
            monte_carlo,
        },
        None,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.preset_dir.as_deref();
    let result = match &cli.command {
        Command::Phases(a) => cmd_phases(a, dir),
        Command::Run(a) => cmd_run(a, a.mode, dir),
        Command::Sample(a) => cmd_run(a, Mode::Sample, dir),
        Command::VerifyTables(a) => cmd_verify(a),
        Command::Resources(a) => cmd_resources(a, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
