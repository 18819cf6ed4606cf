//! STIRAP-based qubit rotation: gate parameters, Gaussian pulse schedule and
//! the bare four-level Hamiltonian.
//!
//! Levels are zero-based in code: `|1>, |2>` (qubit) are 0 and 1, the
//! auxiliary ground state `|3>` is 2 and the excited state `|4>` is 3.
//!
//! Two STIRAP sequences are centred at `-3T/2` and `-T/2`. In each one the
//! Stokes-role lobe precedes the pump-role lobe by `2 t0`:
//!
//! ```text
//! sequence 1:  Ω3 at c1 - t0,   Ω1/Ω2 at c1 + t0
//! sequence 2:  Ω1/Ω2 at c2 - t0,   Ω3 at c2 + t0   (Ω3 carries e^{iδ} here only)
//! ```

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::numerics::{ComplexVector, HermitianOperator};

/// Rotation `U_n(δ)` with axis `n = (sin2χ cosη, sin2χ sinη, cos2χ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub chi: f64,
    pub eta: f64,
    pub delta: f64,
    pub axis: [f64; 3],
    pub label: Option<String>,
}

impl GateSpec {
    /// Angles are reduced to `[0, 2π)`.
    pub fn new(chi: f64, eta: f64, delta: f64) -> Self {
        let chi = chi.rem_euclid(TAU);
        let eta = eta.rem_euclid(TAU);
        let delta = delta.rem_euclid(TAU);
        let s2 = (2.0 * chi).sin();
        let axis = [s2 * eta.cos(), s2 * eta.sin(), (2.0 * chi).cos()];
        Self { chi, eta, delta, axis, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// The 2x2 rotation `cos(δ/2) I - i sin(δ/2) n·σ`.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        rotation(self.axis, self.delta)
    }
}

/// `make_gate(χ, η, δ)`.
pub fn make_gate(chi: f64, eta: f64, delta: f64) -> GateSpec {
    GateSpec::new(chi, eta, delta)
}

/// `U_n(ζ) = cos(ζ/2) I - i sin(ζ/2) n·σ` for a unit axis `n`.
pub fn rotation(axis: [f64; 3], angle: f64) -> [[C64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    // n·σ = [[nz, nx - i ny], [nx + i ny, -nz]]
    let mi_s = C64::new(0.0, -s);
    [
        [C64::new(c, 0.0) + mi_s * nz, mi_s * C64::new(nx, -ny)],
        [mi_s * C64::new(nx, ny), C64::new(c, 0.0) - mi_s * nz],
    ]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("omega0 must be positive and finite, got {0}")]
    Amplitude(f64),
    #[error("sigma must be positive and finite, got {0}")]
    Width(f64),
    #[error("evolution window [{t_min}, {t_max}] is empty")]
    EmptyWindow { t_min: f64, t_max: f64 },
    #[error("window [{t_min}, {t_max}] does not contain the sequence centres {c1} and {c2}")]
    WindowMissesSequences { t_min: f64, t_max: f64, c1: f64, c2: f64 },
    #[error("detuning must be positive for adiabatic elimination, got {0}")]
    Detuning(f64),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
}

/// Amplitude, detuning and timing of the two-sequence pulse schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    /// Peak Rabi amplitude Ω0.
    pub omega0: f64,
    /// One-photon detuning Δ of the excited state(s).
    pub delta_cap: f64,
    /// Sequence spacing T.
    pub period: f64,
    pub t0: f64,
    pub sigma: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl PulseConfig {
    pub const DEFAULT_PERIOD: f64 = 20.0;
    pub const DEFAULT_T0: f64 = 1.6;
    pub const DEFAULT_SIGMA: f64 = 2.0;

    /// Standard timing (T = 20, t0 = 1.6, σ = 2, window [-2T, 0]).
    pub fn new(omega0: f64, delta_cap: f64) -> Self {
        let period = Self::DEFAULT_PERIOD;
        Self {
            omega0,
            delta_cap,
            period,
            t0: Self::DEFAULT_T0,
            sigma: Self::DEFAULT_SIGMA,
            t_min: -2.0 * period,
            t_max: 0.0,
        }
    }

    /// Centres `(c1, c2) = (-3T/2, -T/2)` of the two sequences.
    pub fn sequence_centers(&self) -> (f64, f64) {
        (-1.5 * self.period, -0.5 * self.period)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("delta_cap", self.delta_cap),
            ("period", self.period),
            ("t0", self.t0),
            ("sigma", self.sigma),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::NonFinite(name));
            }
        }
        if self.omega0 <= 0.0 {
            return Err(ConfigError::Amplitude(self.omega0));
        }
        if self.sigma <= 0.0 {
            return Err(ConfigError::Width(self.sigma));
        }
        if self.t_min >= self.t_max {
            return Err(ConfigError::EmptyWindow { t_min: self.t_min, t_max: self.t_max });
        }
        let (c1, c2) = self.sequence_centers();
        let inside = |c: f64| self.t_min <= c && c <= self.t_max;
        if !(inside(c1) && inside(c2)) {
            return Err(ConfigError::WindowMissesSequences {
                t_min: self.t_min,
                t_max: self.t_max,
                c1,
                c2,
            });
        }
        Ok(())
    }

    /// Additionally requires Δ > 0, as the adiabatically eliminated schemes do.
    pub fn validate_positive_detuning(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if self.delta_cap <= 0.0 {
            return Err(ConfigError::Detuning(self.delta_cap));
        }
        Ok(())
    }

    #[inline]
    fn lobe(&self, t: f64, center: f64) -> f64 {
        let x = (t - center) / self.sigma;
        (-0.5 * x * x).exp()
    }

    #[inline]
    fn lobe_derivative(&self, t: f64, center: f64) -> f64 {
        let x = (t - center) / self.sigma;
        -x / self.sigma * (-0.5 * x * x).exp()
    }

    /// Lobe profile shared by the pump-role channels Ω1 and Ω2.
    fn pump_profile(&self, t: f64) -> f64 {
        let (c1, c2) = self.sequence_centers();
        self.lobe(t, c1 + self.t0) + self.lobe(t, c2 - self.t0)
    }

    fn pump_profile_derivative(&self, t: f64) -> f64 {
        let (c1, c2) = self.sequence_centers();
        self.lobe_derivative(t, c1 + self.t0) + self.lobe_derivative(t, c2 - self.t0)
    }

    /// Stokes-role lobes `(sequence 1, sequence 2)` of Ω3 without phases.
    fn stokes_lobes(&self, t: f64) -> (f64, f64) {
        let (c1, c2) = self.sequence_centers();
        (self.lobe(t, c1 - self.t0), self.lobe(t, c2 + self.t0))
    }

    fn stokes_lobes_derivative(&self, t: f64) -> (f64, f64) {
        let (c1, c2) = self.sequence_centers();
        (self.lobe_derivative(t, c1 - self.t0), self.lobe_derivative(t, c2 + self.t0))
    }
}

/// Drive channel of the bare scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    One,
    Two,
    Three,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::One, Channel::Two, Channel::Three];

    /// Zero-based ground level driven by this channel.
    pub fn level(self) -> usize {
        match self {
            Channel::One => 0,
            Channel::Two => 1,
            Channel::Three => 2,
        }
    }

    pub fn from_index(k: usize) -> Option<Channel> {
        match k {
            1 => Some(Channel::One),
            2 => Some(Channel::Two),
            3 => Some(Channel::Three),
            _ => None,
        }
    }
}

/// Complex Rabi amplitude Ω_k(t).
pub fn pulse_value(channel: Channel, t: f64, cfg: &PulseConfig, gate: &GateSpec) -> C64 {
    match channel {
        Channel::One => C64::new(cfg.omega0 * gate.chi.cos() * cfg.pump_profile(t), 0.0),
        Channel::Two => {
            C64::from_polar(cfg.omega0 * gate.chi.sin() * cfg.pump_profile(t), gate.eta)
        }
        Channel::Three => {
            let (first, second) = cfg.stokes_lobes(t);
            cfg.omega0 * (C64::new(first, 0.0) + C64::from_polar(second, gate.delta))
        }
    }
}

/// Analytic time derivative of [`pulse_value`].
pub fn pulse_derivative(channel: Channel, t: f64, cfg: &PulseConfig, gate: &GateSpec) -> C64 {
    match channel {
        Channel::One => {
            C64::new(cfg.omega0 * gate.chi.cos() * cfg.pump_profile_derivative(t), 0.0)
        }
        Channel::Two => C64::from_polar(
            cfg.omega0 * gate.chi.sin() * cfg.pump_profile_derivative(t),
            gate.eta,
        ),
        Channel::Three => {
            let (first, second) = cfg.stokes_lobes_derivative(t);
            cfg.omega0 * (C64::new(first, 0.0) + C64::from_polar(second, gate.delta))
        }
    }
}

/// `[Ω1(t), Ω2(t), Ω3(t)]`.
pub fn pulses(t: f64, cfg: &PulseConfig, gate: &GateSpec) -> [C64; 3] {
    Channel::ALL.map(|ch| pulse_value(ch, t, cfg, gate))
}

pub fn pulse_derivatives(t: f64, cfg: &PulseConfig, gate: &GateSpec) -> [C64; 3] {
    Channel::ALL.map(|ch| pulse_derivative(ch, t, cfg, gate))
}

/// `H = Δ|4><4| + ½ Σ_i (Ω_i |i><4| + h.c.)`
pub fn h_sqr(t: f64, cfg: &PulseConfig, gate: &GateSpec) -> HermitianOperator {
    let mut h = HermitianOperator::zeros(4);
    fill_h_sqr(&pulses(t, cfg, gate), cfg.delta_cap, &mut h);
    h
}

/// `dH/dt` of [`h_sqr`] from the analytic lobe derivatives.
pub fn h_sqr_derivative(t: f64, cfg: &PulseConfig, gate: &GateSpec) -> HermitianOperator {
    let mut h = HermitianOperator::zeros(4);
    fill_h_sqr(&pulse_derivatives(t, cfg, gate), 0.0, &mut h);
    h
}

pub(crate) fn fill_h_sqr(omegas: &[C64; 3], delta_cap: f64, out: &mut HermitianOperator) {
    out.fill_zero();
    out.set_diagonal(3, delta_cap);
    for (i, om) in omegas.iter().enumerate() {
        out.set_coupling(i, 3, 0.5 * om);
    }
}

/// Qubit state `α|1> + β|2>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub alpha: C64,
    pub beta: C64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("qubit state is not normalized: |α|² + |β|² = {0}")]
pub struct NotNormalized(pub f64);

impl QubitState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(alpha: C64, beta: C64) -> Result<Self, NotNormalized> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > Self::NORM_TOL || !n.is_finite() {
            return Err(NotNormalized(n));
        }
        Ok(Self { alpha, beta })
    }

    /// `|1>`
    pub fn one() -> Self {
        Self { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn inner(&self, other: &QubitState) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// Embeds into a `dim`-level register with zeros above level 2.
    pub fn embed(&self, dim: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(dim);
        v[0] = self.alpha;
        v[1] = self.beta;
        v
    }

    pub fn apply(&self, u: &[[C64; 2]; 2]) -> QubitState {
        QubitState {
            alpha: u[0][0] * self.alpha + u[0][1] * self.beta,
            beta: u[1][0] * self.alpha + u[1][1] * self.beta,
        }
    }
}

/// `(dark, bright) = ((-sinχ, e^{iη} cosχ), (cosχ, e^{iη} sinχ))`.
pub fn dark_bright(gate: &GateSpec) -> (QubitState, QubitState) {
    let (s, c) = gate.chi.sin_cos();
    let phase = C64::from_polar(1.0, gate.eta);
    let dark = QubitState { alpha: C64::new(-s, 0.0), beta: phase * c };
    let bright = QubitState { alpha: C64::new(c, 0.0), beta: phase * s };
    (dark, bright)
}

/// Ideal output `U_n(δ) ψ0` (the global phase `e^{-iδ/2}` is dropped).
pub fn target_state(gate: &GateSpec, psi0: &QubitState) -> QubitState {
    psi0.apply(&gate.unitary())
}
