use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::fock::{singular_values, OperatorMatrix};
use crate::quantize::berezin_grid;
use crate::C64;

/// Off-band residual tolerance (relative to `‖A‖_F`) used by [`index_deficiency`].
pub const BAND_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    /// Largest `l − m` kept (entries below the diagonal).
    pub lower: usize,
    /// Largest `m − l` kept (entries above the diagonal).
    pub upper: usize,
    /// Frobenius norm of the discarded entries.
    pub residual: f64,
}

/// Minimal `lower + upper` whose off-band residual is below `tol·‖A‖_F`.
#[allow(clippy::needless_range_loop)]
pub fn band_profile(a: &DMatrix<C64>, tol: f64) -> Result<BandProfile> {
    let (rows, cols) = a.shape();
    // mass[k + cols − 1] = Σ |A_{m+k, m}|², k = l − m
    let mut mass = vec![0.0f64; rows + cols - 1];
    for m in 0..cols {
        for l in 0..rows {
            mass[l + cols - 1 - m] += a[(l, m)].norm_sqr();
        }
    }
    let total: f64 = mass.iter().sum();
    let budget = (tol * total.sqrt()).powi(2);
    let max_lower = rows.saturating_sub(1);
    let max_upper = cols.saturating_sub(1);
    // tail_lower[p] = Σ_{k > p} mass, tail_upper[q] = Σ_{k < −q} mass
    let mut tail_lower = vec![0.0; max_lower + 1];
    for p in (0..max_lower).rev() {
        tail_lower[p] = tail_lower[p + 1] + mass[p + 1 + cols - 1];
    }
    let mut tail_upper = vec![0.0; max_upper + 1];
    for q in (0..max_upper).rev() {
        tail_upper[q] = tail_upper[q + 1] + mass[cols - 1 - (q + 1)];
    }
    let mut best: Option<BandProfile> = None;
    let mut closest = BandProfile { lower: 0, upper: 0, residual: f64::INFINITY };
    let limit = rows.min(cols) / 2;
    for p in 0..=max_lower.min(limit) {
        for q in 0..=max_upper.min(limit) {
            if let Some(b) = &best {
                if p + q >= b.lower + b.upper {
                    break;
                }
            }
            let res2 = tail_lower[p] + tail_upper[q];
            let candidate = BandProfile { lower: p, upper: q, residual: res2.sqrt() };
            if res2 <= budget {
                best = Some(candidate);
                break;
            }
            if candidate.residual < closest.residual {
                closest = candidate;
            }
        }
    }
    best.ok_or(QhaError::NotBanded { lower: closest.lower, upper: closest.upper, residual: closest.residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMethod {
    Deficiency,
    Winding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: i64,
    pub method: IndexMethod,
    /// Truncation used: `D` and, for the deficiency method, the section size `M`.
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<WindingData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionData {
    pub interior: usize,
    pub band: BandProfile,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Rank threshold `tol·σ_max`.
    pub threshold: f64,
    /// Smallest singular value kept as nonzero across both sections.
    pub smallest_kept: f64,
    /// Largest singular value counted as zero across both sections.
    pub largest_dropped: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingData {
    pub radius: f64,
    pub samples: usize,
    pub winding: i64,
    /// Distance of the summed argument change (in turns) from an integer.
    pub residual: f64,
    pub min_modulus: f64,
}

/// Fredholm index of a banded operator from rectangular sections.
///
/// With band `(p, q)` and `M = ⌊interior·D⌋`, the kernel dimension is read
/// from the tall section `A[0..M+p, 0..M]` and the cokernel dimension from
/// the wide section `A[0..M, 0..M+q]` (the adjoint's tall section).
pub fn index_deficiency(a: &OperatorMatrix, tol: f64, interior: f64) -> Result<IndexEstimate> {
    index_deficiency_matrix(&a.entries, tol, interior)
}

pub fn index_deficiency_matrix(a: &DMatrix<C64>, tol: f64, interior: f64) -> Result<IndexEstimate> {
    let d = a.nrows().min(a.ncols());
    let band = band_profile(a, BAND_TOL)?;
    let m = (interior * d as f64).floor() as usize;
    let width = band.lower.max(band.upper);
    if m == 0 || m < 8 * width || m + width > d {
        return Err(QhaError::InvalidSpec(format!(
            "section M = {m} incompatible with bandwidth {width} at D = {d} (need M ≥ 8·bandwidth and M + bandwidth ≤ D)"
        )));
    }
    let tall = a.view((0, 0), (m + band.lower, m)).into_owned();
    let wide = a.view((0, 0), (m, m + band.upper)).into_owned();
    let s_tall = singular_values(&tall);
    let s_wide = singular_values(&wide);
    let sigma_max = s_tall.first().copied().unwrap_or(0.0).max(s_wide.first().copied().unwrap_or(0.0));
    let threshold = tol * sigma_max;
    let mut smallest_kept = f64::INFINITY;
    let mut largest_dropped = 0.0f64;
    for &s in s_tall.iter().chain(&s_wide) {
        if s >= threshold / 10.0 && s <= threshold * 10.0 {
            return Err(QhaError::IllConditioned { sigma: s, threshold });
        }
        if s > threshold {
            smallest_kept = smallest_kept.min(s);
        } else {
            largest_dropped = largest_dropped.max(s);
        }
    }
    let rank = |s: &[f64]| s.iter().filter(|&&v| v > threshold).count();
    let kernel_dim = m - rank(&s_tall);
    let cokernel_dim = m - rank(&s_wide);
    Ok(IndexEstimate {
        value: kernel_dim as i64 - cokernel_dim as i64,
        method: IndexMethod::Deficiency,
        dim: d,
        section: Some(SectionData {
            interior: m,
            band,
            kernel_dim,
            cokernel_dim,
            threshold,
            smallest_kept,
            largest_dropped,
        }),
        winding: None,
    })
}

/// Minus the winding number of `θ ↦ Ã(R e^{iθ})`.
pub fn index_winding(a: &OperatorMatrix, radius: f64, samples: usize) -> Result<IndexEstimate> {
    if samples < 8 {
        return Err(QhaError::InvalidSpec("winding needs at least 8 samples".into()));
    }
    let angles: Vec<f64> = (0..samples).map(|j| 2.0 * PI * j as f64 / samples as f64).collect();
    let values = berezin_grid(a, &[radius], &angles)?;
    let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    let mut largest_step = 0.0f64;
    for j in 0..samples {
        let step = (values[(0, (j + 1) % samples)] / values[(0, j)]).arg();
        largest_step = largest_step.max(step.abs());
        total += step;
    }
    let turns = total / (2.0 * PI);
    let winding = turns.round() as i64;
    let residual = (turns - winding as f64).abs();
    // negated so that a NaN modulus also rejects
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(min_modulus > 10.0 * residual) || min_modulus < 1e-12 || largest_step > PI / 2.0 {
        return Err(QhaError::CurveThroughZero { min_modulus, residual });
    }
    Ok(IndexEstimate {
        value: -winding,
        method: IndexMethod::Winding,
        dim: a.dim(),
        section: None,
        winding: Some(WindingData { radius, samples, winding, residual, min_modulus }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpec;

    fn shift(d: usize, k: i64, weight: f64) -> DMatrix<C64> {
        DMatrix::from_fn(d, d, |l, m| if l as i64 - m as i64 == k { C64::new(weight, 0.0) } else { C64::new(0.0, 0.0) })
    }

    #[test]
    fn band_of_diagonal_and_shifts() {
        let id = DMatrix::<C64>::identity(10, 10);
        assert_eq!(band_profile(&id, 1e-12).unwrap(), BandProfile { lower: 0, upper: 0, residual: 0.0 });
        let b = band_profile(&shift(10, 2, 1.0), 1e-12).unwrap();
        assert_eq!((b.lower, b.upper), (2, 0));
        let b = band_profile(&shift(10, -3, 1.0), 1e-12).unwrap();
        assert_eq!((b.lower, b.upper), (0, 3));
        let full = DMatrix::from_element(10, 10, C64::new(1.0, 0.0));
        assert!(matches!(band_profile(&full, 1e-12), Err(QhaError::NotBanded { .. })));
    }

    #[test]
    fn deficiency_of_shifts() {
        let tol = 1e-8;
        assert_eq!(index_deficiency_matrix(&shift(64, 1, 0.9), tol, 0.5).unwrap().value, -1);
        assert_eq!(index_deficiency_matrix(&shift(64, -2, 1.0), tol, 0.5).unwrap().value, 2);
        assert_eq!(index_deficiency_matrix(&DMatrix::identity(64, 64), tol, 0.5).unwrap().value, 0);
        // invertible lower-triangular perturbation of a shift: index 0
        let a = DMatrix::<C64>::identity(64, 64) * C64::new(2.0, 0.0) + shift(64, 1, 1.0);
        assert_eq!(index_deficiency_matrix(&a, tol, 0.5).unwrap().value, 0);
    }

    #[test]
    fn ill_conditioned_sections_are_rejected() {
        let mut a = DMatrix::<C64>::identity(32, 32);
        a[(3, 3)] = C64::new(1e-8, 0.0);
        assert!(matches!(index_deficiency_matrix(&a, 1e-8, 0.5), Err(QhaError::IllConditioned { .. })));
    }

    #[test]
    fn winding_of_identity_and_through_zero() {
        let s = FockSpec::single(64).unwrap();
        let est = index_winding(&OperatorMatrix::identity(&s), 3.0, 64).unwrap();
        assert_eq!(est.value, 0);
        let z = OperatorMatrix::zeros(&s);
        assert!(matches!(index_winding(&z, 3.0, 64), Err(QhaError::CurveThroughZero { .. })));
    }
}
