//! Spectra of the one-dimensional harmonic oscillator `H = -d²/dx² + (αx)²`
//! perturbed by quasi-periodic zero-order operators `V = Σ c_a U_a`, where
//! `U_a` is the phase-space translation indexed by `a = (a_x, a_ξ)`.
//!
//! The crate computes matrix elements of `V` in the Hermite eigenbasis of `H`
//! (closed form, Bessel series and quadrature), diagonalizes truncations of
//! `H + V`, evaluates the first-order eigenvalue asymptotics
//! `α(2n+1) + c_0 + W(√n) n^{-1/4}` and realizes the resolvent contour-trace
//! machinery used to extract individual eigenvalues.
//!
//! Module map:
//!
//! * [`specialfn`]: Laguerre, Bessel `J_n`, factorial ratios, the `F` factor
//!   and the `A_j` recurrence.
//! * [`model`]: phase points, potentials and their structural validation.
//! * [`matelem`]: matrix elements and truncated matrices of `H + V`.
//! * [`spectral`]: Householder/QL eigensolver and converged spectra.
//! * [`asymptotics`]: the correction `W`, predictions and residual reports.
//! * [`resolvent`]: contour integrals, Neumann trace extraction and norm
//!   estimates.
//! * [`cli`]: configuration, orchestration and CSV/JSON output.

pub mod asymptotics;
pub mod cli;
mod error;
pub mod matelem;
pub mod model;
pub mod par;
pub mod quadrature;
pub mod resolvent;
pub mod spectral;
pub mod specialfn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
