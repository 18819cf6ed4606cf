//! STIRAP-based qubit rotations on a four-level Λ system and their
//! counterdiabatic shortcuts.
//!
//! `numerics` holds the linear algebra and the integrator, `sqr` the bare
//! scheme, `cd` the counterdiabatic generator, `sc2` the five-level Raman
//! synthesis, `evolve` the dynamics and `harness` presets, sweeps and I/O.

pub mod cd;
pub mod evolve;
pub mod harness;
pub mod numerics;
pub mod sc2;
pub mod sqr;

pub use num_complex::Complex64 as C64;
