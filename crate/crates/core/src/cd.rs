//! Counterdiabatic (transitionless) driving.
//!
//! For `H(t) = Σ E_n |n><n|` the counterdiabatic term is
//!
//! ```text
//! H_cd = i Σ_{m≠n} |m><m| ∂tH |n><n| / (E_n - E_m)
//! ```
//!
//! where pairs with `|E_n - E_m| <= eps_deg * max(1, E_max - E_min)` are
//! skipped. Projector sums over a degenerate block do not depend on the basis
//! chosen inside it, so only cross-block pairs contribute and the result is
//! basis independent.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::numerics::{eigh, EigenDecomposition, HermitianOperator, NumericsError};
use crate::sqr::{self, GateSpec, PulseConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Derivative {
    Analytic,
    CentralDifference { step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdOptions {
    /// Relative degeneracy threshold.
    pub eps_deg: f64,
    pub derivative: Derivative,
    /// Tolerance on the real parts of the ground block in [`sqr_cd_couplings`], relative to Ω0.
    pub residual_tol_rel: f64,
    /// Tolerance on the excited row and column in [`sqr_cd_couplings`], relative to Ω0.
    /// These entries scale like `dΩ/dt / Δ` and are not zero for finite detuning.
    pub excited_tol_rel: f64,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            eps_deg: 1e-8,
            derivative: Derivative::Analytic,
            residual_tol_rel: 1e-6,
            excited_tol_rel: 1e-3,
        }
    }
}

impl CdOptions {
    pub fn validate(&self) -> Result<(), CdError> {
        if !(self.eps_deg > 0.0 && self.eps_deg.is_finite()) {
            return Err(CdError::InvalidOptions(format!("eps_deg = {}", self.eps_deg)));
        }
        if let Derivative::CentralDifference { step } = self.derivative {
            if !(step > 0.0 && step.is_finite()) {
                return Err(CdError::InvalidOptions(format!("difference step = {step}")));
            }
        }
        if !(self.residual_tol_rel > 0.0 && self.excited_tol_rel > 0.0) {
            return Err(CdError::InvalidOptions(format!(
                "residual tolerances {} / {}",
                self.residual_tol_rel, self.excited_tol_rel
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CdError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("non-finite entry in the Hamiltonian derivative")]
    NonFiniteDerivative,
    #[error("dimension mismatch between H ({h}) and dH ({dh})")]
    DimensionMismatch { h: usize, dh: usize },
    #[error("counterdiabatic term leaves the ground-state ansatz at t = {t}: entry ({row},{col}) = {value} exceeds {tol:e}")]
    StructuralResidual { t: f64, row: usize, col: usize, value: C64, tol: f64 },
    #[error("invalid counterdiabatic options: {0}")]
    InvalidOptions(String),
}

/// A pair of levels whose gap sits just above the degeneracy threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearDegeneracy {
    pub lower: usize,
    pub upper: usize,
    pub gap: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug)]
pub struct CdTerm {
    pub operator: HermitianOperator,
    pub warnings: Vec<NearDegeneracy>,
}

/// Counterdiabatic term for `H` with derivative `dH`, both at the same time.
pub fn counterdiabatic_term(
    h: &HermitianOperator,
    dh: &HermitianOperator,
    eps_deg: f64,
) -> Result<CdTerm, CdError> {
    if h.dim() != dh.dim() {
        return Err(CdError::DimensionMismatch { h: h.dim(), dh: dh.dim() });
    }
    if !dh.is_finite() {
        return Err(CdError::NonFiniteDerivative);
    }
    let eig = eigh(h)?;
    counterdiabatic_from_eigen(&eig, dh, eps_deg)
}

/// Same as [`counterdiabatic_term`] with a caller-supplied eigenbasis.
pub fn counterdiabatic_from_eigen(
    eig: &EigenDecomposition,
    dh: &HermitianOperator,
    eps_deg: f64,
) -> Result<CdTerm, CdError> {
    let n = dh.dim();
    if eig.eigenvalues.len() != n {
        return Err(CdError::DimensionMismatch { h: eig.eigenvalues.len(), dh: n });
    }
    let e = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let spread = e.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - e.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = eps_deg * spread.max(1.0);

    // X_mn = i <m|dH|n> / (E_n - E_m) on non-degenerate pairs, upper triangle
    let mut x = vec![C64::new(0.0, 0.0); n * n];
    let mut warnings = Vec::new();
    for m in 0..n {
        let dh_m = dh.apply(&v[m]);
        for k in (m + 1)..n {
            let gap = e[k] - e[m];
            if gap.abs() <= threshold {
                continue;
            }
            if gap.abs() < 10.0 * threshold {
                log::debug!("near-degenerate levels {m},{k}: gap {gap:e} (threshold {threshold:e})");
                warnings.push(NearDegeneracy { lower: m, upper: k, gap: gap.abs(), threshold });
            }
            // <m|dH|k> = conj(<k|dH|m>)
            let elem = v[k].inner(&dh_m).conj();
            x[m * n + k] = C64::new(0.0, 1.0) * elem / gap;
        }
    }

    // V X V^dagger with X Hermitian and zero on the diagonal
    let mut out = HermitianOperator::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..n {
                for k in (m + 1)..n {
                    let xmk = x[m * n + k];
                    if xmk == C64::new(0.0, 0.0) {
                        continue;
                    }
                    acc += xmk * v[m][i] * v[k][j].conj() + xmk.conj() * v[k][i] * v[m][j].conj();
                }
            }
            out.set_coupling(i, j, acc);
        }
    }
    Ok(CdTerm { operator: out, warnings })
}

/// `cd_generator(H, dH, t, opts)`: evaluates the counterdiabatic term at `t`.
///
/// With [`Derivative::CentralDifference`] the supplied `dh` is ignored and
/// `(H(t+h) - H(t-h)) / 2h` is used instead.
pub fn cd_generator<H, D>(h: H, dh: D, t: f64, opts: &CdOptions) -> Result<CdTerm, CdError>
where
    H: Fn(f64) -> HermitianOperator,
    D: Fn(f64) -> HermitianOperator,
{
    opts.validate()?;
    let h_t = h(t);
    let dh_t = match opts.derivative {
        Derivative::Analytic => dh(t),
        Derivative::CentralDifference { step } => {
            h(t + step).sub(&h(t - step)).scaled(0.5 / step)
        }
    };
    counterdiabatic_term(&h_t, &dh_t, opts.eps_deg)
}

/// Real amplitudes of `H_cd = i(ω1|2><1| + ω2|3><1| + ω3|3><2|) + h.c.`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdCouplings {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl CdCouplings {
    /// Rebuilds the 4x4 ground-subspace counterdiabatic operator.
    pub fn to_operator(&self) -> HermitianOperator {
        let mut h = HermitianOperator::zeros(4);
        // i ω |a><b| sits in row a, column b
        h.set_coupling(1, 0, C64::new(0.0, self.omega1));
        h.set_coupling(2, 0, C64::new(0.0, self.omega2));
        h.set_coupling(2, 1, C64::new(0.0, self.omega3));
        h
    }
}

/// Counterdiabatic term of the bare SQR Hamiltonian at `t`.
pub fn sqr_cd_term(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &CdOptions,
) -> Result<CdTerm, CdError> {
    cd_generator(
        |s| sqr::h_sqr(s, cfg, gate),
        |s| sqr::h_sqr_derivative(s, cfg, gate),
        t,
        opts,
    )
}

/// Extracts `(ω1, ω2, ω3)` after checking that the counterdiabatic term has
/// the ground-state form: excited row/column below `excited_tol_rel * Ω0`
/// and real parts of the ground block below `residual_tol_rel * Ω0`.
pub fn sqr_cd_couplings(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &CdOptions,
) -> Result<CdCouplings, CdError> {
    let term = sqr_cd_term(t, cfg, gate, opts)?;
    opts.validate()?;
    let tol = opts.residual_tol_rel * cfg.omega0;
    let excited_tol = opts.excited_tol_rel * cfg.omega0;
    let h = &term.operator;
    for i in 0..4 {
        let z = h.get(i, 3);
        if z.norm() > excited_tol {
            return Err(CdError::StructuralResidual { t, row: i, col: 3, value: z, tol: excited_tol });
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let z = h.get(i, j);
            if z.re.abs() > tol {
                return Err(CdError::StructuralResidual { t, row: i, col: j, value: z, tol });
            }
        }
    }
    Ok(CdCouplings { omega1: h.get(1, 0).im, omega2: h.get(2, 0).im, omega3: h.get(2, 1).im })
}

/// `H_SC1 = H_SQR + H_cd`.
pub fn h_sc1(
    t: f64,
    cfg: &PulseConfig,
    gate: &GateSpec,
    opts: &CdOptions,
) -> Result<HermitianOperator, CdError> {
    let mut h = sqr::h_sqr(t, cfg, gate);
    h.add_assign(&sqr_cd_term(t, cfg, gate, opts)?.operator);
    Ok(h)
}
