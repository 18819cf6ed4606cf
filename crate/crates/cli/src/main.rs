mod settings;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqrcd::evolve::{self, Scheme};
use sqrcd::harness::{self, Format, HarnessError, Metadata};

use settings::{Resolved, Settings};

#[derive(Parser, Debug)]
#[command(name = "sqrcd", version, about = "STIRAP qubit rotations with counterdiabatic shortcuts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one time evolution and print the gate fidelity.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write the population/amplitude trace here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json (default: from the file extension, else csv).
        #[arg(long)]
        format: Option<String>,
    },
    /// Bare and shortcut fidelities over an amplitude grid.
    Sweep {
        /// Comma-separated gate names.
        #[arg(long, value_delimiter = ',')]
        gates: Vec<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long = "omega0-min")]
        omega0_min: Option<f64>,
        #[arg(long = "omega0-max")]
        omega0_max: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
    /// Export the control schedule of a scheme.
    Pulses {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Number of time samples.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        format: Option<String>,
    },
    /// Profile of the four-level phase-constraint residual over time.
    Feasibility {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// identity, pauli-x or hadamard.
    #[arg(long)]
    gate: Option<String>,
    /// bare, sc1 or sc2.
    #[arg(long)]
    scheme: Option<String>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long = "delta-cap", allow_negative_numbers = true)]
    delta_cap: Option<f64>,
    /// Detuning rule such as `10*omega0`.
    #[arg(long = "delta-rule")]
    delta_rule: Option<String>,
    /// Initial amplitude on level 1, e.g. 0.6 or 0.6+0.8i.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Initial amplitude on level 2.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Points of the output time grid.
    #[arg(long = "output-points")]
    output_points: Option<usize>,
    /// spline or direct.
    #[arg(long = "sc2-mode")]
    sc2_mode: Option<String>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "usage", message: message.into() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let (code, kind) = match &e {
            HarnessError::UnknownGate { .. } => (2, "unknown_gate"),
            HarnessError::UnknownScheme(_) => (2, "unknown_scheme"),
            HarnessError::InvalidGrid(_) => (2, "invalid_grid"),
            HarnessError::Config { .. } => (2, "config"),
            HarnessError::Io { .. } => (1, "io"),
            HarnessError::Format { .. } => (1, "format"),
            HarnessError::Evolve(evolve::EvolveError::Config(_))
            | HarnessError::Evolve(evolve::EvolveError::InitialState(_)) => (2, "invalid_input"),
            HarnessError::Evolve(_) | HarnessError::Sc2(_) => (1, "simulation"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

fn output_format(explicit: Option<&str>, path: Option<&PathBuf>, fallback: Option<Format>) -> Result<Format, Failure> {
    match explicit {
        Some(s) => Format::parse(s).ok_or_else(|| Failure::usage(format!("unknown format '{s}'; valid formats: csv, json"))),
        None => Ok(path.and_then(|p| Format::from_path(p)).or(fallback).unwrap_or(Format::Csv)),
    }
}

fn resolve(common: &Common, need_gate: bool) -> Result<Resolved, Failure> {
    let file = match &common.config {
        Some(p) => Some(harness::ConfigFile::load(p)?),
        None => None,
    };
    Settings::from_flags(common).resolve(file.as_ref(), need_gate)
}

fn simulate(common: &Common, out: Option<PathBuf>, format: Option<String>) -> Result<(), Failure> {
    let r = resolve(common, true)?;
    let fmt = output_format(format.as_deref(), out.as_ref(), r.format)?;
    let trace = evolve::run(r.scheme, &r.gate, &r.cfg, &r.psi0, &r.run).map_err(HarnessError::from)?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "fidelity={:?}", trace.fidelity);
    for level in evolve::population_summary(&trace) {
        let _ = writeln!(stdout, "level={} max={:?} final={:?}", level.level, level.max, level.last);
    }
    let _ = writeln!(stdout, "norm_drift={:?}", trace.norm_drift);
    if let Some(path) = out {
        let meta = Metadata::new(r.scheme, &r.gate, &r.cfg, &r.psi0, &r.run);
        harness::write_trace(&trace, &meta, &path, fmt)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    gates: Vec<String>,
    common: &Common,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    out: Option<PathBuf>,
    format: Option<String>,
) -> Result<(), Failure> {
    let r = resolve(common, false)?;
    if r.scheme == Scheme::Bare {
        return Err(Failure {
            code: 2,
            kind: "unknown_scheme",
            message: "sweep needs a shortcut scheme: sc1 or sc2".into(),
        });
    }
    let gates = if gates.is_empty() { r.gates.clone() } else { gates };
    if gates.is_empty() {
        return Err(Failure::usage("--gates is required"));
    }
    let min = min.or(r.omega0_min).ok_or_else(|| Failure::usage("--omega0-min is required"))?;
    let max = max.or(r.omega0_max).ok_or_else(|| Failure::usage("--omega0-max is required"))?;
    let points = points.or(r.points).ok_or_else(|| Failure::usage("--points is required"))?;
    let grid = harness::linear_grid(min, max, points)?;
    let opts = harness::SweepOptions {
        delta_rule: r.delta_rule,
        timing: r.cfg.clone(),
        psi0: r.psi0,
        run: r.run.clone(),
    };
    let names: Vec<&str> = gates.iter().map(|g| g.trim()).collect();
    let result = harness::sweep(&names, r.scheme, &grid, &opts)?;
    for row in result.rows.iter().filter(|row| row.error.is_some()) {
        eprintln!("warning: {} at omega0={} failed: {}", row.gate, row.omega0, row.error.as_deref().unwrap_or(""));
    }
    match out {
        Some(path) => {
            let fmt = output_format(format.as_deref(), Some(&path), r.format)?;
            harness::write_sweep(&result, &path, fmt)?;
        }
        None => {
            let fmt = output_format(format.as_deref(), None, r.format)?;
            let stdout = std::io::stdout().lock();
            let res = match fmt {
                Format::Csv => harness::sweep_csv(&result, stdout).map_err(|e| e.to_string()),
                Format::Json => harness::sweep_json(&result, stdout).map_err(|e| e.to_string()),
            };
            res.map_err(|message| Failure { code: 1, kind: "io", message })?;
        }
    }
    Ok(())
}

fn pulses(common: &Common, out: PathBuf, samples: usize, format: Option<String>) -> Result<(), Failure> {
    let r = resolve(common, true)?;
    let fmt = output_format(format.as_deref(), Some(&out), r.format)?;
    let schedule = harness::schedule(r.scheme, &r.gate, &r.cfg, &r.run, samples)?;
    let meta = Metadata::new(r.scheme, &r.gate, &r.cfg, &r.psi0, &r.run);
    harness::write_schedule(&schedule, &meta, &out, fmt)?;
    println!("wrote {} samples of {} controls to {}", schedule.times.len(), r.scheme, out.display());
    Ok(())
}

fn feasibility(common: &Common, samples: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut common = common.clone();
    common.scheme.get_or_insert_with(|| "sc2".into());
    let r = resolve(&common, true)?;
    let profile = harness::feasibility_profile(&r.gate, &r.cfg, &r.run.sc2, samples)?;
    let max = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut text = String::from("t,residual\n");
    for (t, v) in &profile {
        text.push_str(&format!("{t:?},{v:?}\n"));
    }
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{text}"),
    }
    eprintln!("max_residual={max:?}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                eprintln!("error: kind=usage message={:?}", e.kind().to_string());
            }
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate { common, out, format } => simulate(&common, out, format),
        Command::Sweep { gates, common, omega0_min, omega0_max, points, out, format } => {
            sweep(gates, &common, omega0_min, omega0_max, points, out, format)
        }
        Command::Pulses { common, out, samples, format } => pulses(&common, out, samples, format),
        Command::Feasibility { common, samples, out } => feasibility(&common, samples, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: kind={} message={:?}", f.kind, f.message);
            ExitCode::from(f.code)
        }
    }
}
