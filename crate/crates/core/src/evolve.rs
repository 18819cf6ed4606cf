//! Time evolution under the bare, SC1 and SC2 Hamiltonians.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cd::{self, CdOptions};
use crate::numerics::{
    integrate, ComplexVector, CubicSpline, Generator, HermitianOperator, IntegrationStats,
    IntegratorOptions, NumericsError,
};
use crate::sc2::{self, EffectiveTargets, Sc2Controls, Sc2Error, Sc2Options};
use crate::sqr::{self, ConfigError, GateSpec, NotNormalized, PulseConfig, QubitState};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bare,
    Sc1,
    Sc2,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Bare, Scheme::Sc1, Scheme::Sc2];

    pub fn dim(self) -> usize {
        match self {
            Scheme::Bare | Scheme::Sc1 => 4,
            Scheme::Sc2 => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bare => "bare",
            Scheme::Sc1 => "sc1",
            Scheme::Sc2 => "sc2",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the SC2 controls reach the integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sc2Mode {
    /// Targets sampled on a uniform grid and interpolated by cubic splines.
    Spline { points_per_sigma: f64 },
    /// Full solve at every right-hand-side evaluation.
    Direct,
}

impl Default for Sc2Mode {
    fn default() -> Self {
        Sc2Mode::Spline { points_per_sigma: 20.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub integrator: IntegratorOptions,
    pub sc2: Sc2Options,
    pub sc2_mode: Sc2Mode,
}

impl RunOptions {
    pub fn cd(&self) -> &CdOptions {
        &self.sc2.cd
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    InitialState(#[from] NotNormalized),
    #[error("{scheme} schedule: {source}")]
    Schedule { scheme: Scheme, source: Sc2Error },
    #[error("{scheme} integration failed{}: {source}", at_time(*.t))]
    Integration { scheme: Scheme, t: Option<f64>, source: NumericsError },
}

fn at_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

fn failure_time(e: &NumericsError) -> Option<f64> {
    match e {
        NumericsError::StepSizeUnderflow { t, .. }
        | NumericsError::TooManySteps { t, .. }
        | NumericsError::Generator { t, .. } => Some(*t),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub scheme: Scheme,
    pub times: Vec<f64>,
    /// `populations[level][k]` at `times[k]`.
    pub populations: Vec<Vec<f64>>,
    pub states: Vec<ComplexVector>,
    pub final_state: ComplexVector,
    pub fidelity: f64,
    pub norm_drift: f64,
    pub stats: IntegrationStats,
}

impl EvolutionTrace {
    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Largest `|Σ_i p_i(t) - 1|` over the output grid.
    pub fn population_sum_error(&self) -> f64 {
        (0..self.times.len())
            .map(|k| (self.populations.iter().map(|p| p[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPopulation {
    /// One-based level index.
    pub level: usize,
    pub max: f64,
    pub last: f64,
}

pub fn population_summary(trace: &EvolutionTrace) -> Vec<LevelPopulation> {
    trace
        .populations
        .iter()
        .enumerate()
        .map(|(i, p)| LevelPopulation {
            level: i + 1,
            max: p.iter().copied().fold(0.0, f64::max),
            last: p.last().copied().unwrap_or(0.0),
        })
        .collect()
}

/// `|<ψ|U ψ0>|²` with the target embedded on levels 1 and 2.
pub fn fidelity(final_state: &ComplexVector, gate: &GateSpec, psi0: &QubitState) -> f64 {
    let target = sqr::target_state(gate, psi0).embed(final_state.dim());
    final_state.inner(&target).norm_sqr()
}

struct BareGenerator<'a> {
    cfg: &'a PulseConfig,
    gate: &'a GateSpec,
}

impl Generator for BareGenerator<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError> {
        sqr::fill_h_sqr(&sqr::pulses(t, self.cfg, self.gate), self.cfg.delta_cap, out);
        Ok(())
    }
}

struct Sc1Generator<'a> {
    cfg: &'a PulseConfig,
    gate: &'a GateSpec,
    cd: &'a CdOptions,
}

impl Generator for Sc1Generator<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError> {
        *out = cd::h_sc1(t, self.cfg, self.gate, self.cd)
            .map_err(|e| NumericsError::Generator { t, message: e.to_string() })?;
        Ok(())
    }
}

struct Sc2DirectGenerator<'a> {
    cfg: &'a PulseConfig,
    gate: &'a GateSpec,
    opts: &'a Sc2Options,
}

impl Generator for Sc2DirectGenerator<'_> {
    fn dim(&self) -> usize {
        5
    }

    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError> {
        let controls = sc2::solve_controls(t, self.cfg, self.gate, self.opts)
            .map_err(|e| NumericsError::Generator { t, message: e.to_string() })?;
        sc2::fill_h_sc2(&controls, self.cfg.delta_cap, out);
        Ok(())
    }
}

/// SC2 coupling targets tabulated on a uniform grid.
///
/// The products `R_ij e^{iφ_ij}` are smooth in time and are splined per real
/// and imaginary part; the controls are then recovered at any `t` from the
/// interpolated targets, the analytic pulses and the analytic envelope.
#[derive(Clone, Debug)]
pub struct Sc2Schedule {
    cfg: PulseConfig,
    gate: GateSpec,
    opts: Sc2Options,
    // re/im of z12, z13, z23
    splines: [CubicSpline; 6],
}

impl Sc2Schedule {
    pub fn build(
        cfg: &PulseConfig,
        gate: &GateSpec,
        opts: &Sc2Options,
        points_per_sigma: f64,
    ) -> Result<Self, Sc2Error> {
        cfg.validate()?;
        cfg.validate_positive_detuning()?;
        opts.cd.validate()?;
        let span = cfg.t_max - cfg.t_min;
        let n = ((span / cfg.sigma * points_per_sigma.max(1.0)).ceil() as usize).max(1) + 1;
        let step = span / (n - 1) as f64;
        let targets: Vec<EffectiveTargets> = (0..n)
            .into_par_iter()
            .map(|k| sc2::coupling_targets(cfg.t_min + step * k as f64, cfg, gate, &opts.cd))
            .collect::<Result<_, _>>()?;
        let column = |f: &dyn Fn(&EffectiveTargets) -> f64| -> Vec<f64> {
            targets.iter().map(f).collect()
        };
        let columns = [
            column(&|z| z.z12().re),
            column(&|z| z.z12().im),
            column(&|z| z.z13().re),
            column(&|z| z.z13().im),
            column(&|z| z.z23().re),
            column(&|z| z.z23().im),
        ];
        let splines = columns.map(|c| {
            CubicSpline::uniform(cfg.t_min, step, c).expect("finite targets on a valid grid")
        });
        Ok(Self { cfg: cfg.clone(), gate: gate.clone(), opts: *opts, splines })
    }

    pub fn grid_points(&self) -> usize {
        self.splines[0].len()
    }

    pub fn targets_at(&self, t: f64) -> EffectiveTargets {
        let s = &self.splines;
        let z = |k: usize| C64::new(s[k].eval(t), s[k + 1].eval(t));
        EffectiveTargets::from_complex(z(0), z(2), z(4))
    }

    pub fn controls_at(&self, t: f64) -> Sc2Controls {
        let env = if self.opts.envelope { sc2::envelope(t, &self.cfg) } else { 1.0 };
        sc2::controls_from_targets(
            &self.targets_at(t),
            &sqr::pulses(t, &self.cfg, &self.gate),
            self.cfg.delta_cap,
            env,
            self.opts.r_floor(&self.cfg),
        )
    }
}

impl Generator for Sc2Schedule {
    fn dim(&self) -> usize {
        5
    }

    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError> {
        sc2::fill_h_sc2(&self.controls_at(t), self.cfg.delta_cap, out);
        Ok(())
    }
}

/// Integrates `psi0` (embedded on levels 1 and 2) over `[t_min, t_max]`.
pub fn run(
    scheme: Scheme,
    gate: &GateSpec,
    cfg: &PulseConfig,
    psi0: &QubitState,
    opts: &RunOptions,
) -> Result<EvolutionTrace, EvolveError> {
    cfg.validate()?;
    QubitState::new(psi0.alpha, psi0.beta)?;
    let schedule_err = |source: Sc2Error| EvolveError::Schedule { scheme, source };
    if scheme != Scheme::Bare {
        opts.sc2.cd.validate().map_err(|e| schedule_err(e.into()))?;
    }
    let y0 = psi0.embed(scheme.dim());
    let (t0, t1, io) = (cfg.t_min, cfg.t_max, &opts.integrator);
    let result = match scheme {
        Scheme::Bare => integrate(&BareGenerator { cfg, gate }, &y0, t0, t1, io),
        Scheme::Sc1 => integrate(&Sc1Generator { cfg, gate, cd: &opts.sc2.cd }, &y0, t0, t1, io),
        Scheme::Sc2 => {
            cfg.validate_positive_detuning()?;
            match opts.sc2_mode {
                Sc2Mode::Direct => {
                    let g = Sc2DirectGenerator { cfg, gate, opts: &opts.sc2 };
                    integrate(&g, &y0, t0, t1, io)
                }
                Sc2Mode::Spline { points_per_sigma } => {
                    let g = Sc2Schedule::build(cfg, gate, &opts.sc2, points_per_sigma)
                        .map_err(schedule_err)?;
                    integrate(&g, &y0, t0, t1, io)
                }
            }
        }
    };
    let out = result.map_err(|source| EvolveError::Integration {
        scheme,
        t: failure_time(&source),
        source,
    })?;

    let norm_drift = out.max_norm_drift();
    let dim = scheme.dim();
    let mut populations = vec![Vec::with_capacity(out.trace.len()); dim];
    let mut times = Vec::with_capacity(out.trace.len());
    let mut states = Vec::with_capacity(out.trace.len());
    for (t, psi) in out.trace {
        times.push(t);
        for (series, p) in populations.iter_mut().zip(psi.populations()) {
            series.push(p);
        }
        states.push(psi);
    }
    Ok(EvolutionTrace {
        scheme,
        times,
        populations,
        states,
        fidelity: fidelity(&out.final_state, gate, psi0),
        final_state: out.final_state,
        norm_drift,
        stats: out.stats,
    })
}
