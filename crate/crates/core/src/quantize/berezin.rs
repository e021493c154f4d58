use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{QhaError, Result};
use crate::fock::{coherent_state, OperatorMatrix, PhasePoint};
use crate::C64;

/// Default coherent-state tail tolerated by [`berezin`].
pub const BEREZIN_TAIL_TOL: f64 = 1e-9;

/// `Ã(z) = ⟨A k_z, k_z⟩`, rejecting points whose coherent state loses more
/// than [`BEREZIN_TAIL_TOL`] to truncation.
pub fn berezin(a: &OperatorMatrix, z: &PhasePoint) -> Result<C64> {
    berezin_with_tol(a, z, BEREZIN_TAIL_TOL)
}

pub fn berezin_with_tol(a: &OperatorMatrix, z: &PhasePoint, tol: f64) -> Result<C64> {
    let (value, tail) = berezin_unchecked(a, z)?;
    if tail > tol {
        return Err(QhaError::TailBound { radius: z.norm(), tail, tol });
    }
    Ok(value)
}

/// `⟨A k_z, k_z⟩` together with the truncation tail of `k_z`.
pub fn berezin_unchecked(a: &OperatorMatrix, z: &PhasePoint) -> Result<(C64, f64)> {
    let k = coherent_state(z, &a.spec)?;
    Ok((a.apply(&k.vector).inner(&k.vector), k.tail))
}

/// Off-diagonal kernel value `⟨A k_z, k_w⟩` and the larger of the two tails.
pub fn kernel_value(a: &OperatorMatrix, z: &PhasePoint, w: &PhasePoint) -> Result<(C64, f64)> {
    let kz = coherent_state(z, &a.spec)?;
    let kw = coherent_state(w, &a.spec)?;
    Ok((a.apply(&kz.vector).inner(&kw.vector), kz.tail.max(kw.tail)))
}

/// Berezin samples on the polar grid `radii × angles` of a single-mode
/// spec; row `i`, column `j` holds `Ã(radii[i] e^{i angles[j]})`.
pub fn berezin_grid(a: &OperatorMatrix, radii: &[f64], angles: &[f64]) -> Result<DMatrix<C64>> {
    if !a.spec.is_single() {
        return Err(QhaError::InvalidSpec("berezin_grid samples single-mode operators".into()));
    }
    let values: Vec<C64> = (0..radii.len() * angles.len())
        .into_par_iter()
        .map(|idx| berezin(a, &PhasePoint::polar(radii[idx / angles.len()], angles[idx % angles.len()])))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(radii.len(), angles.len(), &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{parity, FockSpec};

    #[test]
    fn identity_and_vacuum_projector() {
        let s = FockSpec::single(64).unwrap();
        let id = OperatorMatrix::identity(&s);
        let z = PhasePoint::single(C64::new(1.0, 0.0));
        assert!((berezin(&id, &z).unwrap() - 1.0).norm() < 1e-14);
        let p = OperatorMatrix::matrix_unit(&s, 0, 0);
        assert!((berezin(&p, &z).unwrap().re - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn tail_violation_is_reported() {
        let s = FockSpec::single(8).unwrap();
        let id = OperatorMatrix::identity(&s);
        let far = PhasePoint::single(C64::new(5.0, 0.0));
        assert!(matches!(berezin(&id, &far), Err(QhaError::TailBound { .. })));
        let (v, tail) = berezin_unchecked(&id, &far).unwrap();
        assert!((v.re - (1.0 - tail)).abs() < 1e-12);
    }

    #[test]
    fn grid_of_identity_is_ones_and_parity_is_bounded() {
        let s = FockSpec::single(64).unwrap();
        let radii = [0.0, 0.5, 1.0, 2.0];
        let angles = [0.0, 1.0, 2.0];
        let g = berezin_grid(&OperatorMatrix::identity(&s), &radii, &angles).unwrap();
        assert!(g.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-12));
        let g = berezin_grid(&parity(&s), &radii, &angles).unwrap();
        // ⟨U k_z, k_z⟩ = ⟨k_{−z}, k_z⟩ = e^{−|z|²}
        for (i, r) in radii.iter().enumerate() {
            for j in 0..angles.len() {
                assert!((g[(i, j)].re - (-r * r).exp()).abs() < 1e-12);
            }
        }
    }
}
