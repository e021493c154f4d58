use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::fock::{expand_theta, op_norm, weyl_exact, weyl_operator, OperatorMatrix, PhasePoint};
use crate::quantize::{kernel_value, BEREZIN_TAIL_TOL};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuityMode {
    /// `‖W_z A W_z* − A‖`
    Shift,
    /// `‖W_z A W_z − A‖`
    Modulation,
    /// `‖W_z A W_{−Θz} − A‖`
    Theta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityProfile {
    pub mode: ContinuityMode,
    pub radii: Vec<f64>,
    /// Largest sampled defect per radius (a lower bound of the true sup).
    pub moduli: Vec<f64>,
    /// Interior-block deviation of the truncated `W_z` from the exact one.
    pub weyl_truncation: Vec<f64>,
    /// Radii whose modulus is within 10× of `weyl_truncation`.
    pub truncation_dominated: Vec<bool>,
}

/// Sample directions: `directions` equispaced phases along each coordinate axis.
pub fn sample_directions(n: usize, directions: usize) -> Vec<PhasePoint> {
    let mut out = Vec::with_capacity(n * directions);
    for axis in 0..n {
        for j in 0..directions {
            let mut c = vec![C64::new(0.0, 0.0); n];
            c[axis] = C64::from_polar(1.0, 2.0 * PI * j as f64 / directions as f64);
            out.push(PhasePoint::new(c));
        }
    }
    out
}

/// Continuity modulus of `A` under the shift, modulation or `Θ` action.
pub fn continuity_modulus(
    a: &OperatorMatrix,
    mode: ContinuityMode,
    theta: Option<&[C64]>,
    radii: &[f64],
    directions: usize,
) -> Result<ContinuityProfile> {
    if directions == 0 {
        return Err(QhaError::InvalidSpec("at least one direction required".into()));
    }
    let spec = &a.spec;
    let theta = match (mode, theta) {
        (ContinuityMode::Theta, Some(t)) => Some(expand_theta(t, spec)?),
        (ContinuityMode::Theta, None) => {
            return Err(QhaError::InvalidSpec("theta mode needs a rotation Θ".into()));
        }
        _ => None,
    };
    let dirs = sample_directions(spec.n(), directions);
    let jobs: Vec<(usize, &PhasePoint)> = (0..radii.len()).flat_map(|i| dirs.iter().map(move |d| (i, d))).collect();
    let defects: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(i, dir)| {
            let r = radii[i];
            if r == 0.0 {
                return (i, 0.0);
            }
            let z = dir.scale(r);
            let left = weyl_operator(&z, spec);
            let right_point = match mode {
                ContinuityMode::Shift => z.neg(),
                ContinuityMode::Modulation => z.clone(),
                ContinuityMode::Theta => z.rotate(theta.as_ref().expect("checked above")).neg(),
            };
            let right = weyl_operator(&right_point, spec);
            let moved = &(&left * a) * &right;
            (i, op_norm(&(moved.entries - &a.entries)))
        })
        .collect();
    let mut moduli = vec![0.0f64; radii.len()];
    for (i, v) in defects {
        moduli[i] = moduli[i].max(v);
    }
    let block = spec.factors().iter().map(|d| d / 2).max().unwrap_or(1).max(1);
    let weyl_truncation: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            if r == 0.0 {
                return 0.0;
            }
            let z = dirs[0].scale(r);
            let diff = weyl_operator(&z, spec).entries - weyl_exact(&z, spec).entries;
            let b = block.min(spec.dim());
            op_norm(&diff.view((0, 0), (b, b)).into_owned())
        })
        .collect();
    let truncation_dominated = moduli.iter().zip(&weyl_truncation).map(|(&m, &t)| m > 0.0 && m <= 10.0 * t).collect();
    Ok(ContinuityProfile { mode, radii: radii.to_vec(), moduli, weyl_truncation, truncation_dominated })
}

/// `max_dir |⟨A k_z, k_{−z}⟩|` per radius.
pub fn localization_profile(a: &OperatorMatrix, radii: &[f64], directions: usize) -> Result<Vec<f64>> {
    let dirs = sample_directions(a.spec.n(), directions.max(1));
    radii
        .par_iter()
        .map(|&r| {
            let mut best = 0.0f64;
            for d in &dirs {
                let z = d.scale(r);
                let (v, tail) = kernel_value(a, &z, &z.neg())?;
                if tail > BEREZIN_TAIL_TOL {
                    return Err(QhaError::TailBound { radius: r, tail, tol: BEREZIN_TAIL_TOL });
                }
                best = best.max(v.norm());
            }
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{parity, shift_alpha, FockSpec};

    fn spec(d: usize) -> FockSpec {
        FockSpec::single(d).unwrap()
    }

    #[test]
    fn parity_is_modulation_continuous_but_not_shift_continuous() {
        let s = spec(64);
        let u = parity(&s);
        let radii = [0.0, 0.25, 1.0];
        let m = continuity_modulus(&u, ContinuityMode::Modulation, None, &radii, 8).unwrap();
        assert_eq!(m.moduli[0], 0.0);
        assert!(m.moduli.iter().all(|&v| v < 1e-12));
        let sh = continuity_modulus(&u, ContinuityMode::Shift, None, &radii, 8).unwrap();
        assert!(sh.moduli[2] > 0.5);
    }

    #[test]
    fn modulation_of_ua_equals_shift_of_a() {
        let s = spec(40);
        let mut a = OperatorMatrix::zeros(&s);
        a.entries[(0, 0)] = C64::new(1.0, 0.0);
        a.entries[(2, 1)] = C64::new(0.5, -0.3);
        let ua = &parity(&s) * &a;
        let radii = [0.3, 0.7];
        let m = continuity_modulus(&ua, ContinuityMode::Modulation, None, &radii, 8).unwrap();
        let sh = continuity_modulus(&a, ContinuityMode::Shift, None, &radii, 8).unwrap();
        for (x, y) in m.moduli.iter().zip(&sh.moduli) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn theta_mode_with_minus_one_is_shift_mode() {
        let s = spec(32);
        let mut a = OperatorMatrix::zeros(&s);
        a.entries[(1, 0)] = C64::new(1.0, 0.0);
        let radii = [0.5];
        let t = continuity_modulus(&a, ContinuityMode::Theta, Some(&[C64::new(-1.0, 0.0)]), &radii, 4).unwrap();
        let m = continuity_modulus(&a, ContinuityMode::Modulation, None, &radii, 4).unwrap();
        assert!((t.moduli[0] - m.moduli[0]).abs() < 1e-14);
        assert!(continuity_modulus(&a, ContinuityMode::Theta, None, &radii, 4).is_err());
    }

    #[test]
    fn theta_modulus_alpha_bound() {
        // θ-modulus of α_w(A) ≤ θ-modulus of A + |1 − e^{iσ(z − Θz, w)}| ‖A‖ at each sampled z
        let s = spec(48);
        let theta = [C64::from_polar(1.0, 2.0 * PI / 3.0)];
        let mut a = OperatorMatrix::zeros(&s);
        a.entries[(0, 0)] = C64::new(1.0, 0.0);
        a.entries[(1, 2)] = C64::new(0.0, 0.4);
        let w = PhasePoint::single(C64::new(0.3, -0.2));
        let aw = shift_alpha(&a, &w);
        let norm_a = a.op_norm();
        for j in 0..6 {
            let z = PhasePoint::polar(0.4, j as f64);
            let tz = z.rotate(&theta);
            let defect = |b: &OperatorMatrix| {
                let moved = &(&weyl_operator(&z, &s) * b) * &weyl_operator(&tz.neg(), &s);
                op_norm(&(moved.entries - &b.entries).view((0, 0), (16, 16)).into_owned())
            };
            let phase = (C64::new(1.0, 0.0) - C64::from_polar(1.0, z.add(&tz.neg()).symplectic(&w))).norm();
            assert!(defect(&aw) <= defect(&a) + phase * norm_a + 1e-8);
        }
    }

    #[test]
    fn localization_of_identity_and_vacuum() {
        let s = spec(64);
        let radii = [0.0, 0.5, 1.0, 1.5];
        let id = localization_profile(&OperatorMatrix::identity(&s), &radii, 4).unwrap();
        let vac = localization_profile(&OperatorMatrix::matrix_unit(&s, 0, 0), &radii, 4).unwrap();
        for (i, r) in radii.iter().enumerate() {
            assert!((id[i] - (-r * r).exp()).abs() < 1e-12);
            assert!((vac[i] - (-r * r / 2.0).exp()).abs() < 1e-12);
        }
    }
}
