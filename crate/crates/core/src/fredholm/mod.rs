//! Numerical Fredholm index of banded operators.

mod experiments;
mod index;

pub use experiments::{
    build_family, build_member, congruence_experiment, index_parity_experiment, FamilyMember, IndexOptions,
};
pub use index::{
    band_profile, index_deficiency, index_deficiency_matrix, index_winding, BandProfile, IndexEstimate, IndexMethod,
    SectionData, WindingData, BAND_TOL,
};
