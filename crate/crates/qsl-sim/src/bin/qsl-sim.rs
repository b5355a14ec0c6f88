//! Command-line front end: single simulations, γ sweeps, and the
//! invariant verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 I/O or config error,
//! 3 solver failure, 4 partial sweep failure.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use qsl_sim::bounds::{self, BoundsReport};
use qsl_sim::config::{FileConfig, OutputFormat, SweepConfig};
use qsl_sim::dynamics::{integrate_rk4_resolved, path_length, ControlSchedule, ControlSegment, Trajectory};
use qsl_sim::protocols::{ProtocolKind, ProtocolSpec};
use qsl_sim::state::{fidelity_overlap, fubini_study_distance};
use qsl_sim::verify::{run_all, VerifyOptions};
use qsl_sim::Error;

#[derive(Parser)]
#[command(name = "qsl-sim", version, about = "Two-level quantum speed limit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one protocol and export the trajectory.
    Simulate(SimulateArgs),
    /// Evaluate the speed-limit bounds over a γ grid.
    Sweep(SweepArgs),
    /// Run the invariant suite and report pass/fail per property.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<ProtocolKind>,
    /// Bang amplitude of the composite pulse (default 10·ω).
    #[arg(long)]
    lambda0: Option<f64>,
    /// Constrained amplitude as a multiple of ω²/γ.
    #[arg(long)]
    c_factor: Option<f64>,
    /// Integration step cap.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<ProtocolKind>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    c_factor: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Space the γ grid logarithmically.
    #[arg(long)]
    log_gamma: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Integration step override; coarse values are expected to fail.
    #[arg(long)]
    step: Option<f64>,
    /// Composite amplitude for closed-form agreement checks.
    #[arg(long, default_value_t = 1e4)]
    lambda0: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match code {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::ConfigParse { .. } => 2,
        Error::InvalidProtocol(_) | Error::NonpositiveAmplitude(_) => 2,
        _ => 3,
    }
}

/// Formats with 12 significant digits, the fixed sweep-output precision.
fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Error> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn resolve_spec(
    omega: f64,
    gamma: f64,
    protocol: ProtocolKind,
    lambda0: Option<f64>,
    c_factor: Option<f64>,
) -> ProtocolSpec {
    match protocol {
        ProtocolKind::CompositeUnconstrained => {
            let lambda0 = lambda0.unwrap_or(10.0 * omega);
            if lambda0 < 10.0 * omega {
                eprintln!(
                    "warning: lambda0 = {lambda0} < 10 omega; composite endpoint error grows as (omega/lambda0)^2"
                );
            }
            ProtocolSpec::composite(omega, gamma, lambda0)
        }
        kind => {
            let factor = c_factor.unwrap_or_else(|| SweepConfig::default_c_factor(kind));
            ProtocolSpec::constrained(kind, omega, gamma, factor * omega * omega / gamma)
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let file = load_config(&args.config)?;
    let omega = args.omega.or(file.omega).unwrap_or(1.0);
    let gamma = args
        .gamma
        .or(file.gamma)
        .ok_or_else(|| Error::InvalidProtocol("simulate requires --gamma".into()))?;
    let protocol = args
        .protocol
        .or(file.protocol)
        .unwrap_or(ProtocolKind::CompositeUnconstrained);
    let step = args.step.or(file.step);
    let output = args.output.or(file.output);
    let format = args.format.or(file.format).unwrap_or(OutputFormat::Csv);

    let (traj, fidelity) = if gamma == 0.0 {
        // Initial and target states coincide: a single-point trajectory.
        let schedule = ControlSchedule::new(
            omega,
            vec![ControlSegment {
                lambda_value: 0.0,
                duration: 0.0,
            }],
        )?;
        let psi0 = ProtocolSpec::composite(omega, 0.0, 10.0 * omega).initial_state()?;
        let traj = integrate_rk4_resolved(&psi0, &schedule, step)?;
        (traj, 1.0)
    } else {
        let spec = resolve_spec(
            omega,
            gamma,
            protocol,
            args.lambda0.or(file.lambda0),
            args.c_factor.or(file.c_factor),
        );
        let schedule = spec.schedule()?;
        let traj = integrate_rk4_resolved(&spec.initial_state()?, &schedule, step)?;
        let fidelity = fidelity_overlap(traj.final_state(), &spec.target_state()?);
        (traj, fidelity)
    };

    let s = fubini_study_distance(traj.initial_state(), traj.final_state());
    println!(
        "protocol={} T={} fidelity={} s={} s_path={}",
        protocol.as_str(),
        fmt(traj.total_duration()),
        fmt(fidelity),
        fmt(s),
        fmt(path_length(&traj)),
    );

    let body = match format {
        OutputFormat::Csv => trajectory_csv(&traj),
        OutputFormat::Json => trajectory_json(&traj)?,
    };
    emit(output.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

const TRAJECTORY_HEADER: &str = "t,re_amp0,im_amp0,re_amp1,im_amp1,x,y,z,delta_e,action";

fn trajectory_rows(traj: &Trajectory) -> Vec<[f64; 10]> {
    let mut rows = Vec::with_capacity(traj.len());
    for (i, state) in traj.states().iter().enumerate() {
        let r = state.bloch_vector();
        rows.push([
            traj.times()[i],
            state.amp0().re,
            state.amp0().im,
            state.amp1().re,
            state.amp1().im,
            r.x,
            r.y,
            r.z,
            traj.variances()[i],
            traj.cumulative_action()[i],
        ]);
    }
    rows
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for row in trajectory_rows(traj) {
        let cells: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn trajectory_json(traj: &Trajectory) -> Result<String, Error> {
    let keys = TRAJECTORY_HEADER.split(',');
    let records: Vec<serde_json::Value> = trajectory_rows(traj)
        .into_iter()
        .map(|row| {
            keys.clone()
                .zip(row.iter())
                .map(|(k, &v)| (k.to_string(), serde_json::json!(v)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        })
        .collect();
    serde_json::to_string_pretty(&records)
        .map_err(|e| Error::InvalidProtocol(format!("JSON encoding failed: {e}")))
}

const SWEEP_HEADER: &str =
    "gamma,theta,s,T,T_A_closed,T_A_traj,T_B_closed,T_B_traj,T_C_closed,T_m,T_piecewise,fidelity,s_path";

fn sweep_row_csv(report: &BoundsReport) -> String {
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    [
        fmt(report.gamma),
        fmt(report.theta),
        fmt(report.s),
        fmt(report.t),
        opt(report.t_a_closed),
        fmt(report.t_a_trajectory),
        opt(report.t_b_closed),
        fmt(report.t_b_trajectory),
        opt(report.t_c_closed),
        fmt(report.t_m),
        fmt(report.t_piecewise),
        fmt(report.fidelity),
        fmt(report.s_path),
    ]
    .join(",")
}

/// A row-level error marker: the γ value followed by empty cells.
fn sweep_error_row(gamma: f64) -> String {
    let blanks = SWEEP_HEADER.matches(',').count();
    format!("{}{}", fmt(gamma), ",".repeat(blanks))
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let file = load_config(&args.config)?;
    let protocol = args
        .protocol
        .or(file.protocol)
        .unwrap_or(ProtocolKind::CompositeUnconstrained);
    let omega = args.omega.or(file.omega).unwrap_or(1.0);
    let cfg = SweepConfig {
        omega,
        gamma_min: args.gamma_min.or(file.gamma_min).unwrap_or(0.0),
        gamma_max: args.gamma_max.or(file.gamma_max).unwrap_or(10.0),
        gamma_steps: args.gamma_steps.or(file.gamma_steps).unwrap_or(200),
        protocol,
        lambda0: args.lambda0.or(file.lambda0).unwrap_or(10.0 * omega),
        c_factor: args
            .c_factor
            .or(file.c_factor)
            .unwrap_or_else(|| SweepConfig::default_c_factor(protocol)),
        step: args.step.or(file.step),
        log_gamma: args.log_gamma || file.log_gamma.unwrap_or(false),
    };
    cfg.validate()?;
    let output = args.output.or(file.output);
    let format = args.format.or(file.format).unwrap_or(OutputFormat::Csv);

    // Points are independent; evaluate in parallel, emit in γ order.
    let results: Vec<(f64, Result<BoundsReport, Error>)> = cfg
        .gamma_grid()
        .into_par_iter()
        .map(|gamma| {
            let report = if gamma == 0.0 {
                degenerate_report(&cfg)
            } else {
                bounds::evaluate(&cfg.spec_at(gamma), cfg.step)
            };
            (gamma, report)
        })
        .collect();

    let failures: Vec<&f64> = results
        .iter()
        .filter(|(_, r)| r.is_err())
        .map(|(g, _)| g)
        .collect();
    for (gamma, result) in &results {
        if let Err(err) = result {
            eprintln!("sweep point gamma={gamma} failed: {err}");
        }
    }

    let body = match format {
        OutputFormat::Csv => {
            let mut out = String::from(SWEEP_HEADER);
            out.push('\n');
            for (gamma, result) in &results {
                out.push_str(&match result {
                    Ok(report) => sweep_row_csv(report),
                    Err(_) => sweep_error_row(*gamma),
                });
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let records: Vec<serde_json::Value> = results
                .iter()
                .map(|(gamma, result)| match result {
                    Ok(report) => serde_json::to_value(report).unwrap_or_default(),
                    Err(err) => serde_json::json!({"gamma": gamma, "error": err.to_string()}),
                })
                .collect();
            serde_json::to_string_pretty(&records)
                .map_err(|e| Error::InvalidProtocol(format!("JSON encoding failed: {e}")))?
        }
    };
    emit(output.as_deref(), &body)?;

    if failures.len() * 10 > results.len() {
        eprintln!(
            "sweep: {}/{} points failed (over 10%)",
            failures.len(),
            results.len()
        );
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

/// The γ = 0 sweep point: initial and target coincide, every time and
/// bound is zero.
fn degenerate_report(cfg: &SweepConfig) -> Result<BoundsReport, Error> {
    let omega = cfg.omega;
    let closed = matches!(cfg.protocol, ProtocolKind::CompositeUnconstrained);
    let zero_closed = closed.then_some(0.0);
    Ok(BoundsReport {
        protocol: cfg.protocol,
        omega,
        gamma: 0.0,
        theta: qsl_sim::state::theta_of(omega, 0.0),
        s: 0.0,
        s_path: 0.0,
        t: 0.0,
        fidelity: 1.0,
        t_a_closed: zero_closed,
        t_a_trajectory: 0.0,
        t_b_closed: zero_closed,
        t_b_trajectory: 0.0,
        t_c_closed: zero_closed,
        t_c_raw: zero_closed,
        t_c_trajectory: (!closed).then_some(0.0),
        t_m: 0.0,
        t_piecewise: 0.0,
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let opts = VerifyOptions {
        step: args.step,
        lambda0: args.lambda0,
        seed: args.seed,
    };
    let results = run_all(&opts)?;
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        all_passed &= r.passed;
        println!(
            "{status} {name}: worst {worst:.3e} (tolerance {tol:.1e}) {detail}",
            name = r.name,
            worst = r.worst,
            tol = r.tolerance,
            detail = r.detail,
        );
    }
    if all_passed {
        println!("all {} properties passed", results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification failed");
        Ok(ExitCode::from(1))
    }
}

/// Writes to the path via a sibling temp file and rename, or to stdout.
fn emit(path: Option<&Path>, body: &str) -> Result<(), Error> {
    match path {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

