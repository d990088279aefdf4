//! Stochastic-limit quantum toolkit.
//!
//! Numerical machinery for weak-coupling (van Hove) limits of open many-body
//! systems: complex damping-coefficient kernels built from reservoir spectral
//! densities, Lindblad-type generators in Heisenberg form, and three model
//! suites built on top of them:
//!
//! * [`qhe`] — Landau-level transport and the fine-tuning condition for the
//!   Hall resistivity,
//! * [`laser`] — the Alli-Sewell dissipative laser generator and its
//!   Hepp-Lieb / Dicke-Haken-Lax equivalences,
//! * [`bcs`] — the open strong-coupling BCS model, its semiclassical spin
//!   dynamics, and the gap/critical-temperature solver.

pub mod bcs;
pub mod error;
pub mod kernels;
pub mod laser;
pub mod linalg;
pub mod lindblad;
pub mod operators;
pub mod qhe;

pub use error::{Error, Result};
pub use kernels::{GammaCoefficient, Sign, SpectralDensity};
pub use lindblad::GeneratorSpec;
pub use operators::{FactorKind, HilbertSpec, OperatorMatrix};
