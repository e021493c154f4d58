//! Quantum harmonic analysis on a truncated Fock space.
//!
//! The crate models the Fock space `F²(ℂⁿ)` by its first `D` orthonormal
//! monomials and builds, on top of dense complex matrices:
//!
//! * [`fock`]: coherent states, Weyl operators, parity and rotation operators;
//! * [`quantize`]: Toeplitz quantization by polar quadrature and the Berezin transform;
//! * [`parity`]: even/odd calculus and the shift/modulation continuity diagnostics;
//! * [`fredholm`]: numerical Fredholm index of banded operators;
//! * [`phase`]: the Fourier–Weyl / symplectic Fourier / twisted convolution stack.
//!
//! Phase space is identified with `ℂⁿ`, the symplectic form is
//! `σ(z, w) = Im(z·w̄)` and the Weyl operators obey
//! `W_z W_w = e^{-iσ(z,w)/2} W_{z+w}`.

pub mod error;
pub mod fock;
pub mod fredholm;
pub mod parity;
pub mod phase;
pub mod quantize;
pub mod report;
pub mod special;

pub use error::{QhaError, Result};
pub use fock::{FockSpec, FockVector, OperatorMatrix, PhasePoint};
pub use report::ExperimentReport;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
