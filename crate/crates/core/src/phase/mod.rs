//! Phase-space Fourier stack: grid symbols, the symplectic and Fourier–Weyl
//! transforms, twisted convolution and Weyl quantization.

pub mod experiments;
mod grid;
mod transforms;
mod twisted;

pub use grid::{ConventionParams, Grid, GridSymbol};
pub use transforms::{
    fourier_weyl, fourier_weyl_parity, fourier_weyl_point, inverse_fourier_weyl, inverse_fourier_weyl_unchecked,
    operator_fourier, regularized_operator_trace, regularized_trace, support_size, symplectic_fourier,
    symplectic_fourier_checked, symplectic_fourier_fft, symplectic_fourier_to, weyl_quantize, weyl_quantize_unchecked,
    weyl_symbol, AbelOptions, AbelTrace, ALIAS_TOL, SYNTHESIS_DECAY_TOL,
};
pub use twisted::{twisted_convolution, twisted_convolution_checked, twisted_reference, TWISTED_AGREEMENT_TOL};
