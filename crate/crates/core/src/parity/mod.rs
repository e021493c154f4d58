//! Even/odd operator calculus and continuity diagnostics of the shift,
//! modulation and `Θ` actions.

mod continuity;
mod intersection;
mod split;

pub use continuity::{continuity_modulus, localization_profile, sample_directions, ContinuityMode, ContinuityProfile};
pub use intersection::{fixed_eigenspace_complement, intersection_probe, EigenspaceSplit, IntersectionProbe};
pub use split::{
    block_decompose, even_odd_split, make_even_with_index, symmetry_class, symmetry_defects, BlockDecomposition,
    EvenOddSplit, SYMMETRY_TOL,
};
