use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::C64;

/// Largest total dimension a tensor-product spec may have.
pub const MAX_PRODUCT_DIM: usize = 4096;

/// Truncated Fock space `F²(ℂⁿ)`.
///
/// A single-mode spec (`n = 1`) keeps the monomials `e_0, …, e_{D-1}`.
/// A product spec keeps the tensor products `e_{m₁} ⊗ e_{m₂} ⊗ …` of
/// per-factor truncations; basis index `m` is the row-major (Kronecker)
/// position of the multi-index `(m₁, m₂, …)`, so the last factor varies
/// fastest and the degree of `m` is `m₁ + m₂ + …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpec {
    factors: Vec<usize>,
}

impl FockSpec {
    pub fn single(dim: usize) -> Result<Self> {
        Self::product(&[dim])
    }

    pub fn product(factors: &[usize]) -> Result<Self> {
        if factors.is_empty() {
            return Err(QhaError::InvalidSpec("at least one factor required".into()));
        }
        if let Some(&d) = factors.iter().find(|&&d| d < 2) {
            return Err(QhaError::InvalidSpec(format!("factor dimension {d} < 2")));
        }
        let total = factors.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if factors.len() > 1 && total > MAX_PRODUCT_DIM {
            return Err(QhaError::DimensionOverflow { dim: total, cap: MAX_PRODUCT_DIM });
        }
        Ok(Self { factors: factors.to_vec() })
    }

    /// Complex dimension `n` of phase space.
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// Total number of basis vectors.
    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn is_single(&self) -> bool {
        self.factors.len() == 1
    }

    /// Multi-index of basis vector `index`.
    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Total degree `|α|` of basis vector `index`.
    pub fn degree(&self, index: usize) -> usize {
        if self.is_single() {
            index
        } else {
            self.multi_index(index).iter().sum()
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.degree(i)).collect()
    }

    /// Basis indices of even (`H_even`) and odd (`H_odd`) total degree.
    pub fn parity_indices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.dim()).partition(|&i| self.degree(i).is_multiple_of(2))
    }
}

/// A point of phase space `ℂⁿ ≅ ℝ²ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    coords: Vec<C64>,
}

impl PhasePoint {
    pub fn new(coords: Vec<C64>) -> Self {
        assert!(!coords.is_empty(), "phase point needs at least one coordinate");
        Self { coords }
    }

    pub fn single(z: C64) -> Self {
        Self { coords: vec![z] }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::single(C64::from_polar(radius, angle))
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// The coordinate of a single-mode point.
    pub fn z(&self) -> C64 {
        self.coords[0]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `σ(z, w) = Im(z · w̄)`.
    pub fn symplectic(&self, other: &PhasePoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a * b.conj()).im).sum()
    }

    pub fn scale(&self, s: f64) -> PhasePoint {
        PhasePoint { coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &PhasePoint) -> PhasePoint {
        PhasePoint { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> PhasePoint {
        self.scale(-1.0)
    }

    /// Coordinate-wise product with a diagonal unitary `Θ`.
    pub fn rotate(&self, theta: &[C64]) -> PhasePoint {
        assert_eq!(theta.len(), self.coords.len());
        PhasePoint { coords: self.coords.iter().zip(theta).map(|(c, t)| c * t).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_oversized_specs() {
        assert!(FockSpec::single(1).is_err());
        assert!(FockSpec::product(&[]).is_err());
        assert!(matches!(FockSpec::product(&[100, 100]), Err(QhaError::DimensionOverflow { dim: 10_000, .. })));
    }

    #[test]
    fn product_degrees_follow_kronecker_order() {
        let spec = FockSpec::product(&[3, 4]).unwrap();
        assert_eq!(spec.dim(), 12);
        assert_eq!(spec.multi_index(7), vec![1, 3]);
        assert_eq!(spec.degree(7), 4);
        assert_eq!(spec.degree(0), 0);
    }

    #[test]
    fn symplectic_form_is_antisymmetric() {
        let z = PhasePoint::single(C64::new(1.0, 0.0));
        let w = PhasePoint::single(C64::new(0.0, 1.0));
        assert_eq!(z.symplectic(&w), -1.0);
        assert_eq!(w.symplectic(&z), 1.0);
        assert_eq!(z.symplectic(&z), 0.0);
    }
}
