//! Raman-synthesized shortcut on a five-level system.
//!
//! The ground-subspace couplings required by the counterdiabatic correction
//! are folded into modified pulses `Ω̃1..Ω̃5` and ground-level detunings
//! `δ1..δ3`. After adiabatic elimination of the two excited levels the
//! five-level Hamiltonian reduces to
//!
//! ```text
//! H_eff(i,j) = Σ_e conj(Ω̃_ie) Ω̃_je / Δ - δ_i δ_ij
//! ```
//!
//! which is matched entrywise to `Δ⁻¹ Ω Ω† / 4 + H_cd` of the bare scheme.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cd::{counterdiabatic_term, CdError, CdOptions, CdTerm, Derivative};
use crate::numerics::HermitianOperator;
use crate::sqr::{self, ConfigError, GateSpec, PulseConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Sc2Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cd(#[from] CdError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sc2Options {
    pub cd: CdOptions,
    /// `R12` below `r_floor_rel * Ω0²` switches off `Ω̃1..Ω̃3`.
    pub r_floor_rel: f64,
    /// Multiply `Ω̃3` by [`envelope`].
    pub envelope: bool,
}

impl Default for Sc2Options {
    fn default() -> Self {
        Self { cd: CdOptions::default(), r_floor_rel: 1e-12, envelope: true }
    }
}

impl Sc2Options {
    pub fn r_floor(&self, cfg: &PulseConfig) -> f64 {
        self.r_floor_rel * cfg.omega0 * cfg.omega0
    }
}

/// Rounding headroom (in ulps) for treating the (2,3) remainder as zero.
const CANCELLATION_ULPS: f64 = 256.0;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Target products `R_ij e^{iφ_ij}` for the pairs (1,2), (1,3), (2,3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTargets {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
    pub phi12: f64,
    pub phi13: f64,
    pub phi23: f64,
}

impl EffectiveTargets {
    pub fn from_complex(z12: C64, z13: C64, z23: C64) -> Self {
        let polar = |z: C64| {
            let r = z.norm();
            (r, if r == 0.0 { 0.0 } else { wrap_phase(z.arg()) })
        };
        let (r12, phi12) = polar(z12);
        let (r13, phi13) = polar(z13);
        let (r23, phi23) = polar(z23);
        Self { r12, r13, r23, phi12, phi13, phi23 }
    }

    pub fn z12(&self) -> C64 {
        C64::from_polar(self.r12, self.phi12)
    }

    pub fn z13(&self) -> C64 {
        C64::from_polar(self.r13, self.phi13)
    }

    pub fn z23(&self) -> C64 {
        C64::from_polar(self.r23, self.phi23)
    }
}

/// Modified pulses `Ω̃1..Ω̃5` and detunings `δ1..δ3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sc2Controls {
    pub omega_t: [C64; 5],
    pub detunings: [f64; 3],
}

impl Sc2Controls {
    pub fn zero() -> Self {
        Self { omega_t: [C64::new(0.0, 0.0); 5], detunings: [0.0; 3] }
    }

    pub fn is_finite(&self) -> bool {
        self.omega_t.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.detunings.iter().all(|d| d.is_finite())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.omega_t.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Bare pulses and their time derivatives at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSnapshot {
    pub omegas: [C64; 3],
    pub derivatives: [C64; 3],
}

impl PulseSnapshot {
    pub fn at(t: f64, cfg: &PulseConfig, gate: &GateSpec) -> Self {
        Self { omegas: sqr::pulses(t, cfg, gate), derivatives: sqr::pulse_derivatives(t, cfg, gate) }
    }
}

fn outer_quarter(a: &[C64; 3], b: &[C64; 3], delta_cap: f64) -> HermitianOperator {
    // (a_i b_j^* + b_i a_j^*) / 4Δ
    let mut h = HermitianOperator::zeros(3);
    let s = 0.25 / delta_cap;
    for i in 0..3 {
        for j in i..3 {
            let z = (a[i] * b[j].conj() + b[i] * a[j].conj()) * (0.5 * s);
            if i == j {
                h.set_diagonal(i, z.re);
            } else {
                h.set_coupling(i, j, z);
            }
        }
    }
    h
}

/// `Ω Ω† / 4Δ` for explicit pulse values.
pub fn h_eff_sqr_from(omegas: &[C64; 3], delta_cap: f64) -> HermitianOperator {
    outer_quarter(omegas, omegas, delta_cap)
}

/// Counterdiabatic term of the eliminated Hamiltonian for explicit pulses.
pub fn h_eff_cd_from(
    snap: &PulseSnapshot,
    delta_cap: f64,
    opts: &CdOptions,
) -> Result<CdTerm, CdError> {
    let h = h_eff_sqr_from(&snap.omegas, delta_cap);
    let dh = outer_quarter(&snap.omegas, &snap.derivatives, delta_cap).scaled(2.0);
    counterdiabatic_term(&h, &dh, opts.eps_deg)
}

pub fn h_eff_sqr(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
) -> Result<HermitianOperator, ConfigError> {
    cfg.validate_positive_detuning()?;
    Ok(h_eff_sqr_from(&sqr::pulses(t, cfg, gate), cfg.delta_cap))
}

pub fn h_eff_cd(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &CdOptions,
) -> Result<HermitianOperator, Sc2Error> {
    cfg.validate_positive_detuning()?;
    opts.validate()?;
    let term = match opts.derivative {
        Derivative::Analytic => {
            h_eff_cd_from(&PulseSnapshot::at(t, cfg, gate), cfg.delta_cap, opts)?
        }
        Derivative::CentralDifference { step } => {
            let h = |s| h_eff_sqr_from(&sqr::pulses(s, cfg, gate), cfg.delta_cap);
            let dh = h(t + step).sub(&h(t - step)).scaled(0.5 / step);
            counterdiabatic_term(&h(t), &dh, opts.eps_deg)?
        }
    };
    Ok(term.operator)
}

/// `R_ij e^{iφ_ij} = Ω_i Ω_j^* / 4 + Δ <i|H_cd|j>` for explicit pulses.
pub fn targets_from(
    snap: &PulseSnapshot,
    delta_cap: f64,
    opts: &CdOptions,
) -> Result<EffectiveTargets, CdError> {
    let cd = h_eff_cd_from(snap, delta_cap, opts)?.operator;
    let w = &snap.omegas;
    let z = |i: usize, j: usize| w[i] * w[j].conj() * 0.25 + cd.get(i, j) * delta_cap;
    Ok(EffectiveTargets::from_complex(z(0, 1), z(0, 2), z(1, 2)))
}

pub fn coupling_targets(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &CdOptions,
) -> Result<EffectiveTargets, Sc2Error> {
    let cd = h_eff_cd(t, cfg, gate, opts)?;
    let w = sqr::pulses(t, cfg, gate);
    let d = cfg.delta_cap;
    let z = |i: usize, j: usize| w[i] * w[j].conj() * 0.25 + cd.get(i, j) * d;
    Ok(EffectiveTargets::from_complex(z(0, 1), z(0, 2), z(1, 2)))
}

/// Logistic `1 / (1 + e^{-x})` without overflow.
fn logistic(x: f64) -> f64 {
    0.5 * (1.0 + (0.5 * x).tanh())
}

/// Smooth window equal to one around both pulse sequences and zero outside,
/// with edges at `±4σ` from the sequence centres and steepness Ω0.
pub fn envelope(t: f64, cfg: &PulseConfig) -> f64 {
    let k = cfg.omega0;
    let w = 4.0 * cfg.sigma;
    let (c1, c2) = cfg.sequence_centers();
    let window = |c: f64| logistic(k * (t - c + w)) * logistic(-k * (t - c - w));
    window(c2) + window(c1)
}

/// Equal-split solution of the target equations.
///
/// `envelope` multiplies `Ω̃3`; `r_floor` is the absolute floor on `R12`.
pub fn controls_from_targets(
    targets: &EffectiveTargets,
    omegas: &[C64; 3],
    delta_cap: f64,
    envelope: f64,
    r_floor: f64,
) -> Sc2Controls {
    let mut om = [C64::new(0.0, 0.0); 5];
    if targets.r12 >= r_floor && targets.r12 > 0.0 {
        let sqrt_r12 = targets.r12.sqrt();
        // halve on the branch centred at the bare product phase, which stays
        // fixed in time; the (-π, π] branch cut sits on it when η = π
        let bare = omegas[0] * omegas[1].conj();
        let reference = if bare.norm() > 0.0 { bare.arg() } else { 0.0 };
        let half = 0.5 * (reference + wrap_phase(targets.phi12 - reference));
        om[0] = C64::from_polar(sqrt_r12, -half);
        om[1] = C64::from_polar(sqrt_r12, half);
        om[2] = C64::from_polar(targets.r13 * envelope / sqrt_r12, targets.phi13 - half);
    }
    // R e^{iφ} = R23 e^{iφ23} - conj(Ω̃2) Ω̃3
    let via_first = om[1].conj() * om[2];
    let mut rest = targets.z23() - via_first;
    // the CD part of the targets carries eigensolver rounding of relative
    // size ~ ε·Δ/gap, where the bright gap is ρ/(4Δ)
    let rho: f64 = omegas.iter().map(|w| w.norm_sqr()).sum();
    let noise = if rho > 0.0 { 4.0 * delta_cap * delta_cap / rho } else { 1.0 };
    let tol = CANCELLATION_ULPS * f64::EPSILON * (1.0 + noise);
    if rest.norm() <= tol * (targets.r23 + via_first.norm()) {
        rest = C64::new(0.0, 0.0);
    }
    let (r, phi) = (rest.norm(), if rest.norm() == 0.0 { 0.0 } else { wrap_phase(rest.arg()) });
    om[3] = C64::from_polar(r.sqrt(), -0.5 * phi);
    om[4] = C64::from_polar(r.sqrt(), 0.5 * phi);

    let four_d = 4.0 * delta_cap;
    let detunings = [
        (4.0 * om[0].norm_sqr() - omegas[0].norm_sqr()) / four_d,
        (4.0 * (om[1].norm_sqr() + om[3].norm_sqr()) - omegas[1].norm_sqr()) / four_d,
        (4.0 * (om[4].norm_sqr() + om[2].norm_sqr()) - omegas[2].norm_sqr()) / four_d,
    ];
    Sc2Controls { omega_t: om, detunings }
}

pub fn solve_controls(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &Sc2Options,
) -> Result<Sc2Controls, Sc2Error> {
    let targets = coupling_targets(t, cfg, gate, &opts.cd)?;
    let env = if opts.envelope { envelope(t, cfg) } else { 1.0 };
    Ok(controls_from_targets(
        &targets,
        &sqr::pulses(t, cfg, gate),
        cfg.delta_cap,
        env,
        opts.r_floor(cfg),
    ))
}

/// Fills the five-level Hamiltonian for given controls.
///
/// Diagonal `(-δ1, -δ2, -δ3, -Δ, -Δ)`; the excited rows carry `-Ω̃`, so
/// `<4|H|i> = -Ω̃_i` and `<5|H|2> = -Ω̃4`, `<5|H|3> = -Ω̃5`.
pub fn fill_h_sc2(controls: &Sc2Controls, delta_cap: f64, out: &mut HermitianOperator) {
    out.fill_zero();
    for (i, d) in controls.detunings.iter().enumerate() {
        out.set_diagonal(i, -d);
    }
    out.set_diagonal(3, -delta_cap);
    out.set_diagonal(4, -delta_cap);
    let om = &controls.omega_t;
    for i in 0..3 {
        out.set_coupling(3, i, -om[i]);
    }
    out.set_coupling(4, 1, -om[3]);
    out.set_coupling(4, 2, -om[4]);
}

pub fn h_sc2_from_controls(controls: &Sc2Controls, delta_cap: f64) -> HermitianOperator {
    let mut h = HermitianOperator::zeros(5);
    fill_h_sc2(controls, delta_cap, &mut h);
    h
}

pub fn h_sc2(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &Sc2Options,
) -> Result<HermitianOperator, Sc2Error> {
    Ok(h_sc2_from_controls(&solve_controls(t, cfg, gate, opts)?, cfg.delta_cap))
}

/// Eliminated form of the five-level Hamiltonian for given controls.
pub fn h_eff_sc2(controls: &Sc2Controls, delta_cap: f64) -> HermitianOperator {
    let om = &controls.omega_t;
    // excited-level couplings per ground level: (via |4>, via |5>)
    let legs = [
        [om[0], C64::new(0.0, 0.0)],
        [om[1], om[3]],
        [om[2], om[4]],
    ];
    let mut h = HermitianOperator::zeros(3);
    for i in 0..3 {
        for j in i..3 {
            let g = (legs[i][0].conj() * legs[j][0] + legs[i][1].conj() * legs[j][1]) / delta_cap;
            if i == j {
                h.set_diagonal(i, g.re - controls.detunings[i]);
            } else {
                h.set_coupling(i, j, g);
            }
        }
    }
    h
}

/// Phase mismatch `|wrap(φ13 - φ12 - φ23)|` of the targets, zero when any
/// magnitude is below `r_floor`.
pub fn feasibility_from_targets(targets: &EffectiveTargets, r_floor: f64) -> f64 {
    if targets.r12 < r_floor || targets.r13 < r_floor || targets.r23 < r_floor {
        return 0.0;
    }
    wrap_phase(targets.phi13 - targets.phi12 - targets.phi23).abs()
}

/// How far the targets at `t` are from being reachable with a single
/// excited level (radians).
pub fn feasibility_residual(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &Sc2Options,
) -> Result<f64, Sc2Error> {
    let targets = coupling_targets(t, cfg, gate, &opts.cd)?;
    Ok(feasibility_from_targets(&targets, opts.r_floor(cfg)))
}
