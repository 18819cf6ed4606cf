//! Merging of preset defaults, config-file entries and command-line flags.

use sqrcd::evolve::{RunOptions, Scheme, Sc2Mode};
use sqrcd::harness::{self, ConfigFile, Context, DeltaRule, Format, HarnessError};
use sqrcd::sqr::{GateSpec, PulseConfig, QubitState};
use sqrcd::C64;

use crate::{Common, Failure};

/// Values given on the command line.
pub struct Settings<'a> {
    flags: &'a Common,
}

/// Everything a subcommand needs.
pub struct Resolved {
    pub gate: GateSpec,
    pub scheme: Scheme,
    pub cfg: PulseConfig,
    pub delta_rule: DeltaRule,
    pub psi0: QubitState,
    pub run: RunOptions,
    pub format: Option<Format>,
    pub gates: Vec<String>,
    pub omega0_min: Option<f64>,
    pub omega0_max: Option<f64>,
    pub points: Option<usize>,
}

fn parse_mode(s: &str, points_per_sigma: f64) -> Option<Sc2Mode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "direct" => Some(Sc2Mode::Direct),
        "spline" => Some(Sc2Mode::Spline { points_per_sigma }),
        _ => None,
    }
}

impl<'a> Settings<'a> {
    pub fn from_flags(flags: &'a Common) -> Self {
        Self { flags }
    }

    pub fn resolve(&self, file: Option<&ConfigFile>, need_gate: bool) -> Result<Resolved, Failure> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        let f = self.flags;

        let scheme_name = f.scheme.clone().or_else(|| file.str("scheme").map(String::from));
        let scheme = match scheme_name {
            Some(s) => harness::parse_scheme(&s)?,
            None => return Err(Failure::usage("--scheme is required (bare, sc1 or sc2)")),
        };
        let gate_name = f.gate.clone().or_else(|| file.str("gate").map(String::from));
        let preset = match gate_name {
            Some(name) => Some(harness::preset(&name, Context::for_scheme(scheme))?),
            None if need_gate => {
                return Err(Failure::usage(format!(
                    "--gate is required; valid names: {}",
                    harness::PRESET_NAMES.join(", ")
                )))
            }
            None => None,
        };

        let mut cfg = preset
            .as_ref()
            .map(|p| p.cfg.clone())
            .unwrap_or_else(|| PulseConfig::new(1.0, DeltaRule::for_scheme(scheme).factor));
        for (key, slot) in [
            ("period", &mut cfg.period),
            ("t0", &mut cfg.t0),
            ("sigma", &mut cfg.sigma),
            ("t_min", &mut cfg.t_min),
            ("t_max", &mut cfg.t_max),
        ] {
            if let Some(v) = file.f64(key)? {
                *slot = v;
            }
        }

        let rule_text = f.delta_rule.clone().or_else(|| file.str("delta_rule").map(String::from));
        let delta_rule = match rule_text {
            Some(s) => DeltaRule::parse(&s)
                .ok_or_else(|| Failure::usage(format!("invalid delta rule '{s}'; expected e.g. 10*omega0")))?,
            None => DeltaRule::for_scheme(scheme),
        };
        let omega0 = f.omega0.or(file.f64("omega0")?);
        if let Some(w) = omega0 {
            cfg.omega0 = w;
        }
        let explicit_delta = f.delta_cap.or(file.f64("delta_cap")?);
        cfg.delta_cap = match explicit_delta {
            Some(d) => d,
            None if omega0.is_some() || f.delta_rule.is_some() || file.str("delta_rule").is_some() => {
                delta_rule.delta(cfg.omega0)
            }
            None => cfg.delta_cap,
        };

        let mut run = RunOptions::default();
        if let Some(v) = f.rtol.or(file.f64("rtol")?) {
            run.integrator.rtol = v;
        }
        if let Some(v) = f.atol.or(file.f64("atol")?) {
            run.integrator.atol = v;
        }
        if let Some(v) = f.output_points.or(file.usize("output_points")?) {
            run.integrator.output_points = v;
        }
        if let Some(v) = file.u64("max_steps")? {
            run.integrator.max_steps = v;
        }
        if let Some(v) = file.f64("eps_deg")? {
            run.sc2.cd.eps_deg = v;
        }
        if let Some(v) = file.f64("r_floor_rel")? {
            run.sc2.r_floor_rel = v;
        }
        if let Some(v) = file.bool("envelope")? {
            run.sc2.envelope = v;
        }
        let pps = file.f64("points_per_sigma")?.unwrap_or(20.0);
        run.sc2_mode = Sc2Mode::Spline { points_per_sigma: pps };
        if let Some(m) = file.with("sc2_mode", "spline or direct", |s| parse_mode(s, pps))? {
            run.sc2_mode = m;
        }
        if let Some(s) = &f.sc2_mode {
            run.sc2_mode = parse_mode(s, pps)
                .ok_or_else(|| Failure::usage(format!("unknown sc2 mode '{s}'; valid modes: spline, direct")))?;
        }

        let amplitude = |flag: &Option<String>, key: &str, default: C64| -> Result<C64, Failure> {
            match flag {
                Some(s) => harness::parse_complex(s)
                    .ok_or_else(|| Failure::usage(format!("--{key} expects a complex number, got '{s}'"))),
                None => Ok(file.complex(key)?.unwrap_or(default)),
            }
        };
        let alpha = amplitude(&f.alpha, "alpha", C64::new(1.0, 0.0))?;
        let beta = amplitude(&f.beta, "beta", C64::new(0.0, 0.0))?;
        let psi0 = QubitState::new(alpha, beta).map_err(|e| Failure::from(HarnessError::Evolve(e.into())))?;

        let format = match file.str("format") {
            Some(s) => Some(Format::parse(s).ok_or_else(|| Failure::usage(format!("unknown format '{s}'")))?),
            None => None,
        };
        let gates = file
            .str("gates")
            .map(|s| s.split(',').map(|g| g.trim().to_string()).filter(|g| !g.is_empty()).collect())
            .unwrap_or_default();

        Ok(Resolved {
            gate: preset.map(|p| p.gate).unwrap_or_else(|| sqrcd::sqr::make_gate(0.0, 0.0, 0.0)),
            scheme,
            cfg,
            delta_rule,
            psi0,
            run,
            format,
            gates,
            omega0_min: file.f64("omega0_min")?,
            omega0_max: file.f64("omega0_max")?,
            points: file.usize("points")?,
        })
    }
}
