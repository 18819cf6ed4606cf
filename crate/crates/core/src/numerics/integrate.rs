//! Adaptive Dormand–Prince 5(4) integration of `i dψ/dt = H(t) ψ` (ħ = 1).
//!
//! Steps are clipped so that every point of the uniform output grid is hit
//! exactly; no dense-output interpolation is involved in the sampled trace.
//! The state is never renormalized.

use num_complex::Complex64 as C64;

use super::linalg::{ComplexVector, HermitianOperator};
use super::NumericsError;

/// A time-dependent Hamiltonian of fixed dimension.
pub trait Generator {
    fn dim(&self) -> usize;

    /// Writes `H(t)` into `out`, which always has dimension [`Generator::dim`].
    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError>;
}

/// Adapts a closure `t -> H(t)` to [`Generator`].
pub struct FnGenerator<F> {
    dim: usize,
    f: F,
}

impl<F> FnGenerator<F>
where
    F: Fn(f64) -> HermitianOperator,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Generator for FnGenerator<F>
where
    F: Fn(f64) -> HermitianOperator,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian_at(&self, t: f64, out: &mut HermitianOperator) -> Result<(), NumericsError> {
        let h = (self.f)(t);
        if h.dim() != self.dim {
            return Err(NumericsError::DimensionMismatch { expected: self.dim, found: h.dim() });
        }
        *out = h;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Number of points of the uniform output grid, endpoints included.
    pub output_points: usize,
    /// Steps shorter than `min_step_rel * (t_end - t_start)` abort the run.
    pub min_step_rel: f64,
    pub max_steps: u64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            output_points: 2000,
            min_step_rel: 1e-15,
            max_steps: 2_000_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegrationStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
    /// Sum of the embedded local error estimates (2-norm, absolute units)
    /// over accepted steps; a conservative bound on the global error.
    pub error_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct Integration {
    pub final_state: ComplexVector,
    pub trace: Vec<(f64, ComplexVector)>,
    pub stats: IntegrationStats,
}

impl Integration {
    /// `max_t | ||ψ(t)|| - 1 |` over the sampled trace.
    pub fn max_norm_drift(&self) -> f64 {
        self.trace.iter().map(|(_, v)| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau (Hairer, Nørsett & Wanner, DOPRI5).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct Rhs<'a, G: Generator + ?Sized> {
    generator: &'a G,
    h: HermitianOperator,
    evaluations: u64,
}

impl<G: Generator + ?Sized> Rhs<'_, G> {
    /// `k = -i H(t) y`
    fn eval(&mut self, t: f64, y: &[C64], k: &mut [C64]) -> Result<(), NumericsError> {
        self.evaluations += 1;
        self.generator.hamiltonian_at(t, &mut self.h)?;
        if !self.h.is_finite() {
            return Err(NumericsError::NonFinite { context: format!("generator output at t = {t}") });
        }
        self.h.apply_into(y, k);
        for z in k.iter_mut() {
            *z = C64::new(z.im, -z.re);
        }
        Ok(())
    }
}

fn axpy_stage(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += *a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn weighted_rms(err: &[C64], y0: &[C64], y1: &[C64], rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = atol + rtol * a.norm().max(b.norm());
            (e.norm() / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates the Schrödinger equation from `t_start` to `t_end`.
///
/// Returns the final state and the state sampled on a uniform grid of
/// `opts.output_points` points covering `[t_start, t_end]`.
pub fn integrate<G: Generator + ?Sized>(
    generator: &G,
    psi0: &ComplexVector,
    t_start: f64,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Integration, NumericsError> {
    let n = generator.dim();
    if psi0.dim() != n {
        return Err(NumericsError::DimensionMismatch { expected: n, found: psi0.dim() });
    }
    if !(t_start < t_end) {
        return Err(NumericsError::InvalidInterval { t_start, t_end });
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(NumericsError::InvalidTolerance { rtol: opts.rtol, atol: opts.atol });
    }
    if opts.output_points < 2 {
        return Err(NumericsError::InvalidOutputGrid { points: opts.output_points });
    }
    if !psi0.is_finite() {
        return Err(NumericsError::NonFinite { context: "initial state".into() });
    }

    let span = t_end - t_start;
    let min_step = opts.min_step_rel * span;
    let last = opts.output_points - 1;
    let grid_time = |k: usize| {
        if k == last {
            t_end
        } else {
            t_start + span * (k as f64) / (last as f64)
        }
    };

    let mut rhs = Rhs { generator, h: HermitianOperator::zeros(n), evaluations: 0 };
    let zero = C64::new(0.0, 0.0);
    let mut y = psi0.as_slice().to_vec();
    let mut y_new = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut err = vec![zero; n];
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];

    let mut t = t_start;
    rhs.eval(t, &y, &mut k1)?;

    // starting step (Hairer's heuristic)
    let mut h = {
        let d0 = inf_norm(&y).max(1e-300);
        let d1 = inf_norm(&k1).max(1e-300);
        let h0 = (0.01 * d0 / d1).min(span);
        axpy_stage(&y, h0, &[(1.0, &k1)], &mut stage);
        rhs.eval(t + h0, &stage, &mut k2)?;
        let diff: Vec<C64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
        let d2 = inf_norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    };

    let mut trace = Vec::with_capacity(opts.output_points);
    trace.push((t_start, psi0.clone()));
    let mut next_out = 1usize;
    let mut stats = IntegrationStats::default();
    let mut rejected_last = false;

    while next_out <= last {
        if stats.accepted_steps + stats.rejected_steps >= opts.max_steps {
            return Err(NumericsError::TooManySteps { t, steps: opts.max_steps });
        }
        let target = grid_time(next_out);
        let landing = t + h >= target;
        let step = if landing { target - t } else { h };
        if step < min_step && !landing {
            return Err(NumericsError::StepSizeUnderflow { t, step });
        }

        axpy_stage(&y, step, &[(A21, &k1)], &mut stage);
        rhs.eval(t + C2 * step, &stage, &mut k2)?;
        axpy_stage(&y, step, &[(A31, &k1), (A32, &k2)], &mut stage);
        rhs.eval(t + C3 * step, &stage, &mut k3)?;
        axpy_stage(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut stage);
        rhs.eval(t + C4 * step, &stage, &mut k4)?;
        axpy_stage(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut stage);
        rhs.eval(t + C5 * step, &stage, &mut k5)?;
        axpy_stage(
            &y,
            step,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut stage,
        );
        let t_next = if landing { target } else { t + step };
        rhs.eval(t_next, &stage, &mut k6)?;
        axpy_stage(
            &y,
            step,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            &mut y_new,
        );
        rhs.eval(t_next, &y_new, &mut k7)?;

        for i in 0..n {
            err[i] = step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err_norm = weighted_rms(&err, &y, &y_new, opts.rtol, opts.atol);
        if !err_norm.is_finite() {
            return Err(NumericsError::NonFinite { context: format!("error estimate at t = {t}") });
        }

        if err_norm <= 1.0 {
            stats.accepted_steps += 1;
            stats.error_estimate += err.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            t = t_next;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            if landing {
                trace.push((t, ComplexVector::new(y.clone())));
                next_out += 1;
            }
            let mut fac = SAFETY * err_norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            // a step shortened only to land on the output grid says nothing about h
            if !landing || step >= h {
                h = step * fac;
            } else {
                h = h.max(step * fac);
            }
            rejected_last = false;
        } else {
            stats.rejected_steps += 1;
            let fac = (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN);
            h = step * fac;
            rejected_last = true;
            if h < min_step {
                return Err(NumericsError::StepSizeUnderflow { t, step: h });
            }
        }
    }

    stats.rhs_evaluations = rhs.evaluations;
    Ok(Integration { final_state: ComplexVector::new(y), trace, stats })
}
