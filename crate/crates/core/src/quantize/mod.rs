//! Toeplitz quantization by polar quadrature and the Berezin transform.

mod berezin;
mod symbol;
mod toeplitz;

pub use berezin::{berezin, berezin_grid, berezin_unchecked, berezin_with_tol, kernel_value, BEREZIN_TAIL_TOL};
pub use symbol::{symbol_reflect, AngularMode, Radial, Smoothness, SymbolFn};
pub use toeplitz::{shift_weight, toeplitz, toeplitz_with_report, QuadratureScheme, ToeplitzReport};
