//! Periodic-box spectral laboratory for mild (Duhamel) solutions of
//! chemotaxis-fluid systems.
//!
//! The crate is organised in layers:
//!
//! * [`grid`], [`fft`], [`field`], [`propagator`] — periodic grids, Fourier
//!   field algebra, spectral differential operators, Leray projection and the
//!   exact semigroup propagators.
//! * [`balls`], [`norms`], [`lp`], [`frac`] — critical function-space norms:
//!   Morrey, Campanato, caloric Carleson functionals, Besov-Morrey via
//!   Littlewood-Paley blocks, path norms, and the fractional-integral /
//!   maximal-function pair.
//! * [`timegrid`], [`duhamel`] — time meshes and the integral operators of
//!   the mild formulation (bilinear maps and damped linear maps).
//! * [`solver`], [`stepper`] — Picard fixed-point iteration for the coupled
//!   systems and an independent exponential Runge-Kutta cross-check
//!   integrator.
//! * [`diagnostics`] — executable qualitative checks: mass conservation,
//!   nonnegativity, L1 contraction, parabolic scaling covariance, decay
//!   weights, embedding verifiers.
//! * [`presets`], [`snapshot`], [`report`], [`manifest`], [`runner`] — data
//!   generation, on-disk formats and run orchestration.
//! * [`reference`] — deliberately naive brute-force implementations (dense
//!   DFT propagators, trapezoid quadrature, exhaustive scans) used by the
//!   verification suite as independent oracles.

pub mod balls;
pub mod duhamel;
mod error;
pub mod fft;
pub mod frac;
pub mod field;
pub mod grid;
pub mod lp;
pub mod norms;
pub mod manifest;
pub mod presets;
pub mod report;
pub mod runner;
pub mod snapshot;
pub mod diagnostics;
pub mod propagator;
pub mod solver;
pub mod stepper;
pub mod reference;
pub mod timegrid;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use grid::Grid;
