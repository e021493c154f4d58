//! Truncated Fock space: basis, coherent states, Weyl operators, parity.

pub mod dump;
mod operator;
mod spec;
mod weyl;

pub use operator::{numerical_rank, op_norm, singular_values, tensor_product, FockVector, OperatorMatrix};
pub use spec::{FockSpec, PhasePoint, MAX_PRODUCT_DIM};
pub(crate) use weyl::expand_theta;
pub use weyl::{
    ccr_defect, coherent_coefficients, coherent_state, displacement, ln_monomial_norm, modulation_gamma, monomial_norm,
    parity, parity_rotation, shift_alpha, weyl_diagonal, weyl_elements, weyl_exact, weyl_operator, weyl_single,
    weyl_tail, CoherentState, UNIMODULAR_TOL,
};
