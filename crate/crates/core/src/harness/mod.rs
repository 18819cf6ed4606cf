//! Gate presets, amplitude sweeps, schedules and file I/O.

mod config;
mod io;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cd;
use crate::evolve::{self, EvolveError, RunOptions, Scheme, Sc2Mode, Sc2Schedule};
use crate::sc2;
use crate::sqr::{self, GateSpec, PulseConfig, QubitState};
use crate::C64;

pub use config::{parse_complex, ConfigFile};
pub use io::{
    read_schedule_csv, read_sweep_csv, read_sweep_json, read_trace_csv, read_trace_json,
    schedule_csv, sweep_csv, sweep_json, trace_csv, write_schedule, write_sweep, write_trace,
    Format, Metadata, TraceRecord, TraceTable,
};

pub const PRESET_NAMES: [&str; 3] = ["identity", "pauli-x", "hadamard"];

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown gate '{name}'; valid names: {}", .valid.join(", "))]
    UnknownGate { name: String, valid: Vec<String> },
    #[error("unknown scheme '{0}'; valid schemes: bare, sc1, sc2")]
    UnknownScheme(String),
    #[error("invalid amplitude grid: {0}")]
    InvalidGrid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Sc2(#[from] sc2::Sc2Error),
}

/// Which amplitude and detuning convention a preset uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    /// Per-gate Ω0 with Δ = 10 Ω0, used for the bare and SC1 schemes.
    Standard,
    /// Ω0 = 500 and Δ = 100 Ω0 for every gate.
    Sc2,
}

impl Context {
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Bare | Scheme::Sc1 => Context::Standard,
            Scheme::Sc2 => Context::Sc2,
        }
    }
}

/// `Δ = factor * Ω0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRule {
    pub factor: f64,
}

impl DeltaRule {
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Bare | Scheme::Sc1 => DeltaRule { factor: 10.0 },
            Scheme::Sc2 => DeltaRule { factor: 100.0 },
        }
    }

    pub fn delta(&self, omega0: f64) -> f64 {
        self.factor * omega0
    }

    /// Accepts `k*omega0`, `k * Ω0` or a bare factor `k`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let factor = match s.split_once('*') {
            Some((k, rest)) => {
                let rest = rest.trim();
                if rest != "omega0" && rest != "Ω0" && rest != "Ω₀" {
                    return None;
                }
                k.trim().parse().ok()?
            }
            None => s.parse().ok()?,
        };
        (factor > 0.0 && f64::is_finite(factor)).then_some(DeltaRule { factor })
    }
}

impl std::fmt::Display for DeltaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*omega0", self.factor)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub gate: GateSpec,
    pub cfg: PulseConfig,
}

fn unknown_gate(name: &str) -> HarnessError {
    HarnessError::UnknownGate {
        name: name.to_string(),
        valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
    }
}

/// `(Ω0, χ, η, δ)` of a named gate.
fn preset_parameters(name: &str) -> Option<(f64, f64, f64, f64)> {
    match name {
        "identity" => Some((250.0, FRAC_PI_8, PI, 0.0)),
        "pauli-x" => Some((750.0, FRAC_PI_4, PI, PI)),
        "hadamard" => Some((350.0, FRAC_PI_8, PI, PI)),
        _ => None,
    }
}

pub fn preset(name: &str, context: Context) -> Result<Preset, HarnessError> {
    let key = name.trim().to_ascii_lowercase();
    let (omega0, chi, eta, delta) = preset_parameters(&key).ok_or_else(|| unknown_gate(name))?;
    let gate = sqr::make_gate(chi, eta, delta).with_label(key.clone());
    let cfg = match context {
        Context::Standard => PulseConfig::new(omega0, 10.0 * omega0),
        Context::Sc2 => PulseConfig::new(500.0, 100.0 * 500.0),
    };
    Ok(Preset { name: key, gate, cfg })
}

pub fn gate_by_name(name: &str) -> Result<GateSpec, HarnessError> {
    Ok(preset(name, Context::Standard)?.gate)
}

pub fn parse_scheme(s: &str) -> Result<Scheme, HarnessError> {
    Scheme::parse(s).ok_or_else(|| HarnessError::UnknownScheme(s.to_string()))
}

/// Single run of a named preset in the context of `scheme`.
pub fn run_preset(
    name: &str,
    scheme: Scheme,
    psi0: &QubitState,
    opts: &RunOptions,
) -> Result<evolve::EvolutionTrace, HarnessError> {
    let p = preset(name, Context::for_scheme(scheme))?;
    Ok(evolve::run(scheme, &p.gate, &p.cfg, psi0, opts)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega0: f64,
    pub gate: String,
    pub scheme: Scheme,
    pub fidelity_bare: Option<f64>,
    pub fidelity_shortcut: Option<f64>,
    /// Failure message of either run at this point.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub delta_rule: DeltaRule,
    /// Timing template; `omega0` and `delta_cap` are set per row.
    pub timing: PulseConfig,
    pub psi0: QubitState,
    pub options: RunOptions,
    pub tool_version: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for<'a>(&'a self, gate: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.gate == gate)
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub delta_rule: DeltaRule,
    pub timing: PulseConfig,
    pub psi0: QubitState,
    pub run: RunOptions,
}

impl SweepOptions {
    pub fn for_scheme(scheme: Scheme) -> Self {
        Self {
            delta_rule: DeltaRule::for_scheme(scheme),
            timing: PulseConfig::new(1.0, 1.0),
            psi0: QubitState::one(),
            run: RunOptions::default(),
        }
    }
}

/// `n` evenly spaced amplitudes from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>, HarnessError> {
    match n {
        0 => Err(HarnessError::InvalidGrid("no points requested".into())),
        1 if min == max => Ok(vec![min]),
        1 => Err(HarnessError::InvalidGrid("a single point needs min = max".into())),
        _ => Ok((0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect()),
    }
}

fn check_grid(grid: &[f64]) -> Result<(), HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::InvalidGrid("empty".into()));
    }
    if let Some(x) = grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(HarnessError::InvalidGrid(format!("non-positive amplitude {x}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::InvalidGrid("amplitudes must strictly increase".into()));
    }
    Ok(())
}

/// Bare and shortcut fidelities over `grid` for each gate, in gate-major order.
///
/// Points run in parallel; a failed run leaves its fidelity empty and records
/// the message in the row.
pub fn sweep(
    gates: &[&str],
    scheme: Scheme,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult, HarnessError> {
    if scheme == Scheme::Bare {
        return Err(HarnessError::UnknownScheme("bare (sweeps need a shortcut scheme)".into()));
    }
    check_grid(grid)?;
    let presets: Vec<Preset> =
        gates.iter().map(|g| preset(g, Context::Standard)).collect::<Result<_, _>>()?;
    let points: Vec<(&Preset, f64)> =
        presets.iter().flat_map(|p| grid.iter().map(move |&w| (p, w))).collect();
    let rows = points
        .par_iter()
        .map(|&(p, omega0)| {
            let cfg = PulseConfig {
                omega0,
                delta_cap: opts.delta_rule.delta(omega0),
                ..opts.timing.clone()
            };
            let mut errors = Vec::new();
            let mut fid = |s: Scheme| match evolve::run(s, &p.gate, &cfg, &opts.psi0, &opts.run) {
                Ok(tr) => Some(tr.fidelity),
                Err(e) => {
                    log::warn!("sweep point {} at omega0 = {omega0} failed: {e}", p.name);
                    errors.push(e.to_string());
                    None
                }
            };
            let fidelity_bare = fid(Scheme::Bare);
            let fidelity_shortcut = fid(scheme);
            SweepRow {
                omega0,
                gate: p.name.clone(),
                scheme,
                fidelity_bare,
                fidelity_shortcut,
                error: (!errors.is_empty()).then(|| errors.join("; ")),
            }
        })
        .collect();
    Ok(SweepResult {
        scheme,
        delta_rule: opts.delta_rule,
        timing: opts.timing.clone(),
        psi0: opts.psi0,
        options: opts.run.clone(),
        tool_version: TOOL_VERSION.to_string(),
        rows,
    })
}

/// Control channels sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub scheme: Scheme,
    /// Complex channels in column order, e.g. `O1` or `w2`.
    pub channels: Vec<String>,
    pub detunings: bool,
    pub times: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    /// `δ1..δ3` per time for SC2, empty otherwise.
    pub detuning_values: Vec<[f64; 3]>,
}

impl Schedule {
    pub fn column_names(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for ch in &self.channels {
            cols.push(format!("mag_{ch}"));
            cols.push(format!("ph_{ch}"));
        }
        if self.detunings {
            cols.extend(["d1", "d2", "d3"].map(String::from));
        }
        cols
    }
}

/// Samples the controls of `scheme` at `points` uniform times.
///
/// Bare: `O1..O3`; SC1: `O1..O3` and the counterdiabatic couplings `w1..w3`
/// (`<2|H|1>`, `<3|H|1>`, `<3|H|2>`); SC2: `O1..O5` and `d1..d3`.
pub fn schedule(
    scheme: Scheme,
    gate: &GateSpec,
    cfg: &PulseConfig,
    opts: &RunOptions,
    points: usize,
) -> Result<Schedule, HarnessError> {
    cfg.validate().map_err(EvolveError::from)?;
    let times = linear_grid(cfg.t_min, cfg.t_max, points.max(2))?;
    let bare = |t: f64| sqr::pulses(t, cfg, gate).to_vec();
    let (channels, values, detuning_values): (Vec<&str>, Vec<Vec<C64>>, Vec<[f64; 3]>) =
        match scheme {
            Scheme::Bare => (vec!["O1", "O2", "O3"], times.iter().map(|&t| bare(t)).collect(), vec![]),
            Scheme::Sc1 => {
                let rows = times
                    .par_iter()
                    .map(|&t| {
                        let h = cd::sqr_cd_term(t, cfg, gate, opts.cd())
                            .map_err(|e| sc2::Sc2Error::from(e))?
                            .operator;
                        let mut v = bare(t);
                        v.extend([h.get(1, 0), h.get(2, 0), h.get(2, 1)]);
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                (vec!["O1", "O2", "O3", "w1", "w2", "w3"], rows, vec![])
            }
            Scheme::Sc2 => {
                let controls: Vec<sc2::Sc2Controls> = match opts.sc2_mode {
                    Sc2Mode::Spline { points_per_sigma } => {
                        let s = Sc2Schedule::build(cfg, gate, &opts.sc2, points_per_sigma)?;
                        times.iter().map(|&t| s.controls_at(t)).collect()
                    }
                    Sc2Mode::Direct => times
                        .par_iter()
                        .map(|&t| sc2::solve_controls(t, cfg, gate, &opts.sc2))
                        .collect::<Result<_, _>>()?,
                };
                (
                    vec!["O1", "O2", "O3", "O4", "O5"],
                    controls.iter().map(|c| c.omega_t.to_vec()).collect(),
                    controls.iter().map(|c| c.detunings).collect(),
                )
            }
        };
    Ok(Schedule {
        scheme,
        channels: channels.into_iter().map(String::from).collect(),
        detunings: scheme == Scheme::Sc2,
        times,
        values,
        detuning_values,
    })
}

/// `(t, feasibility residual)` at `points` uniform times.
pub fn feasibility_profile(
    gate: &GateSpec,
    cfg: &PulseConfig,
    opts: &sc2::Sc2Options,
    points: usize,
) -> Result<Vec<(f64, f64)>, HarnessError> {
    cfg.validate().map_err(EvolveError::from)?;
    let times = linear_grid(cfg.t_min, cfg.t_max, points.max(2))?;
    times
        .par_iter()
        .map(|&t| Ok((t, sc2::feasibility_residual(t, cfg, gate, opts)?)))
        .collect()
}
