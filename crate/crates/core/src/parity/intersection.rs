use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::fock::{OperatorMatrix, PhasePoint, UNIMODULAR_TOL};
use crate::quantize::{berezin_unchecked, BEREZIN_TAIL_TOL};
use crate::C64;

/// Factor coordinates of `V₀ = (∩ⱼ E_{Θⱼ}(1))^⊥` and of its complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenspaceSplit {
    pub v0: Vec<usize>,
    pub v0_perp: Vec<usize>,
}

/// Reads `V₀` off a list of diagonal unitaries `Θⱼ` (each `n × n`).
pub fn fixed_eigenspace_complement(thetas: &[DMatrix<C64>]) -> Result<EigenspaceSplit> {
    let first = thetas.first().ok_or_else(|| QhaError::InvalidSpec("empty Θ list".into()))?;
    let n = first.nrows();
    let mut moved = vec![false; n];
    for t in thetas {
        if t.nrows() != n || t.ncols() != n {
            return Err(QhaError::DimensionMismatch(format!(
                "Θ of shape {}x{}, expected {n}x{n}",
                t.nrows(),
                t.ncols()
            )));
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| t[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > 1e-12 {
            return Err(QhaError::NotDiagonal(off));
        }
        for (c, flag) in moved.iter_mut().enumerate() {
            let d = t[(c, c)];
            if (d.norm() - 1.0).abs() > UNIMODULAR_TOL {
                return Err(QhaError::NotUnimodular(d.norm()));
            }
            *flag |= (d - 1.0).norm() > 1e-12;
        }
    }
    let (v0, v0_perp) = (0..n).partition(|&c| moved[c]);
    Ok(EigenspaceSplit { v0, v0_perp })
}

/// Berezin decay along `V₀` and flatness along `V₀^⊥`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionProbe {
    pub split: EigenspaceSplit,
    pub v_radii: Vec<f64>,
    /// `sup_w |Ã(v + w)|` per `|v|` (sup also over `v` directions).
    pub envelope: Vec<f64>,
    /// `(max_w − min_w)/max_w` of `|Ã(v + w)|` per `|v|`, worst direction.
    pub w_variation: Vec<f64>,
    pub max_tail: f64,
    /// Samples whose coherent-state tail exceeds the Berezin tolerance.
    pub tail_violations: usize,
    pub samples: usize,
}

/// Samples `|Ã(v + w)|` for `v` on rays in the first `V₀` coordinate and `w`
/// on a polar grid (`w_radii × w_directions`) in the first `V₀^⊥` coordinate.
pub fn intersection_probe(
    a: &OperatorMatrix,
    thetas: &[DMatrix<C64>],
    v_radii: &[f64],
    v_directions: usize,
    w_radii: &[f64],
    w_directions: usize,
) -> Result<IntersectionProbe> {
    let n = a.spec.n();
    if n < 2 {
        return Err(QhaError::InvalidSpec("intersection probe needs a product spec".into()));
    }
    let split = fixed_eigenspace_complement(thetas)?;
    if thetas[0].nrows() != n {
        return Err(QhaError::DimensionMismatch(format!("Θ is {0}x{0}, spec has n = {n}", thetas[0].nrows())));
    }
    let (&vc, &wc) = match (split.v0.first(), split.v0_perp.first()) {
        (Some(v), Some(w)) => (v, w),
        _ => return Err(QhaError::InvalidSpec("probe needs V₀ and V₀^⊥ both nontrivial".into())),
    };
    let mut ws = vec![C64::new(0.0, 0.0)];
    for &rho in w_radii.iter().filter(|&&r| r > 0.0) {
        for t in 0..w_directions.max(1) {
            ws.push(C64::from_polar(rho, 2.0 * PI * t as f64 / w_directions.max(1) as f64));
        }
    }
    let vdirs = v_directions.max(1);
    let rows: Vec<(f64, f64, f64, usize)> = v_radii
        .par_iter()
        .map(|&r| {
            let mut env = 0.0f64;
            let mut variation = 0.0f64;
            let mut max_tail = 0.0f64;
            let mut violations = 0;
            for j in 0..vdirs {
                let v = C64::from_polar(r, 2.0 * PI * j as f64 / vdirs as f64);
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for &w in &ws {
                    let mut c = vec![C64::new(0.0, 0.0); n];
                    c[vc] = v;
                    c[wc] = w;
                    let (val, tail) = berezin_unchecked(a, &PhasePoint::new(c))?;
                    max_tail = max_tail.max(tail);
                    if tail > BEREZIN_TAIL_TOL {
                        violations += 1;
                    }
                    lo = lo.min(val.norm());
                    hi = hi.max(val.norm());
                }
                env = env.max(hi);
                if hi > 0.0 {
                    variation = variation.max((hi - lo) / hi);
                }
            }
            Ok((env, variation, max_tail, violations))
        })
        .collect::<Result<_>>()?;
    Ok(IntersectionProbe {
        split,
        v_radii: v_radii.to_vec(),
        envelope: rows.iter().map(|r| r.0).collect(),
        w_variation: rows.iter().map(|r| r.1).collect(),
        max_tail: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        tail_violations: rows.iter().map(|r| r.3).sum(),
        samples: v_radii.len() * vdirs * ws.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{tensor_product, FockSpec};

    fn diag(entries: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    #[test]
    fn eigenspace_readings() {
        let s = fixed_eigenspace_complement(&[diag(&[1.0])]).unwrap();
        assert!(s.v0.is_empty());
        assert_eq!(s.v0_perp, vec![0]);
        let s = fixed_eigenspace_complement(&[diag(&[-1.0, 1.0])]).unwrap();
        assert_eq!(s.v0, vec![0]);
        let s = fixed_eigenspace_complement(&[diag(&[-1.0, 1.0]), diag(&[1.0, -1.0])]).unwrap();
        assert_eq!(s.v0, vec![0, 1]);
        let mut bad = diag(&[1.0, 1.0]);
        bad[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(fixed_eigenspace_complement(&[bad]), Err(QhaError::NotDiagonal(_))));
    }

    #[test]
    fn vacuum_times_identity_decays_along_v0() {
        let f = FockSpec::single(16).unwrap();
        let a = tensor_product(&OperatorMatrix::matrix_unit(&f, 0, 0), &OperatorMatrix::identity(&f)).unwrap();
        let probe = intersection_probe(&a, &[diag(&[-1.0, 1.0])], &[0.0, 1.0, 2.0], 4, &[0.5, 1.0], 4).unwrap();
        for (r, e) in probe.v_radii.iter().zip(&probe.envelope) {
            assert!((e - (-r * r / 2.0).exp()).abs() < 1e-6, "{r}: {e}");
        }
    }
}
