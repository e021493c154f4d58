use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use super::spec::{FockSpec, MAX_PRODUCT_DIM};
use crate::error::{QhaError, Result};
use crate::C64;

/// A vector of the truncated Fock space in the orthonormal monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub spec: FockSpec,
    pub coeffs: DVector<C64>,
}

impl FockVector {
    pub fn new(spec: FockSpec, coeffs: DVector<C64>) -> Result<Self> {
        if coeffs.len() != spec.dim() {
            return Err(QhaError::DimensionMismatch(format!(
                "{} coefficients for dimension {}",
                coeffs.len(),
                spec.dim()
            )));
        }
        Ok(Self { spec, coeffs })
    }

    /// Basis vector `e_index`.
    pub fn basis(spec: &FockSpec, index: usize) -> Self {
        let mut coeffs = DVector::zeros(spec.dim());
        coeffs[index] = C64::new(1.0, 0.0);
        Self { spec: spec.clone(), coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `⟨self, other⟩`, linear in the first slot.
    pub fn inner(&self, other: &FockVector) -> C64 {
        other.coeffs.dotc(&self.coeffs)
    }

    /// Rank-one operator `self ⊗ other`, i.e. `f ↦ ⟨f, other⟩ self`.
    pub fn outer(&self, other: &FockVector) -> OperatorMatrix {
        OperatorMatrix::from_entries(self.spec.clone(), &self.coeffs * other.coeffs.adjoint())
    }

    pub fn kron(&self, other: &FockVector) -> Result<FockVector> {
        let mut factors = self.spec.factors().to_vec();
        factors.extend_from_slice(other.spec.factors());
        let spec = FockSpec::product(&factors)?;
        Ok(FockVector { spec, coeffs: self.coeffs.kronecker(&other.coeffs) })
    }
}

/// Dense operator on a truncated Fock space: `entries[(l, m)] = ⟨A e_m, e_l⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub spec: FockSpec,
    pub entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(spec: FockSpec, entries: DMatrix<C64>) -> Result<Self> {
        let d = spec.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(QhaError::DimensionMismatch(format!(
                "{}x{} entries for dimension {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { spec, entries })
    }

    pub(crate) fn from_entries(spec: FockSpec, entries: DMatrix<C64>) -> Self {
        debug_assert_eq!(entries.nrows(), spec.dim());
        Self { spec, entries }
    }

    pub fn identity(spec: &FockSpec) -> Self {
        let d = spec.dim();
        Self::from_entries(spec.clone(), DMatrix::identity(d, d))
    }

    pub fn zeros(spec: &FockSpec) -> Self {
        let d = spec.dim();
        Self::from_entries(spec.clone(), DMatrix::zeros(d, d))
    }

    pub fn from_diagonal(spec: &FockSpec, diag: &[C64]) -> Self {
        let d = spec.dim();
        assert_eq!(diag.len(), d);
        Self::from_entries(spec.clone(), DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Rank-one `e_row ⊗ e_col`.
    pub fn matrix_unit(spec: &FockSpec, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(spec);
        m.entries[(row, col)] = C64::new(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_entries(self.spec.clone(), self.entries.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_entries(self.spec.clone(), &self.entries * s)
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        FockVector { spec: self.spec.clone(), coeffs: &self.entries * &v.coeffs }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.entries)
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        numerical_rank(&self.entries, tol)
    }

    /// Frobenius inner product `⟨self, other⟩_F = Tr(other* self)`.
    pub fn frobenius_inner(&self, other: &OperatorMatrix) -> C64 {
        other.entries.iter().zip(self.entries.iter()).map(|(b, a)| b.conj() * a).sum()
    }

    /// Top-left `size × size` block.
    pub fn block(&self, size: usize) -> DMatrix<C64> {
        self.entries.view((0, 0), (size, size)).into_owned()
    }

    /// Kronecker product `self ⊗ other` on the product spec.
    pub fn tensor(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        tensor_product(self, other)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.spec, rhs.spec);
        OperatorMatrix::from_entries(self.spec.clone(), &self.entries + &rhs.entries)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.spec, rhs.spec);
        OperatorMatrix::from_entries(self.spec.clone(), &self.entries - &rhs.entries)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.spec, rhs.spec);
        OperatorMatrix::from_entries(self.spec.clone(), &self.entries * &rhs.entries)
    }
}

/// Kronecker product of operators on single-mode (or product) specs.
pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let mut factors = a.spec.factors().to_vec();
    factors.extend_from_slice(b.spec.factors());
    let total = a.dim().saturating_mul(b.dim());
    if total > MAX_PRODUCT_DIM {
        return Err(QhaError::DimensionOverflow { dim: total, cap: MAX_PRODUCT_DIM });
    }
    let spec = FockSpec::product(&factors)?;
    Ok(OperatorMatrix::from_entries(spec, a.entries.kronecker(&b.entries)))
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn op_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn numerical_rank(m: &DMatrix<C64>, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&v| v > tol * max).count(),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize) -> FockSpec {
        FockSpec::single(d).unwrap()
    }

    #[test]
    fn identity_trace_and_norms() {
        let id = OperatorMatrix::identity(&spec(7));
        assert_eq!(id.trace(), C64::new(7.0, 0.0));
        assert!((id.op_norm() - 1.0).abs() < 1e-14);
        assert!((id.frobenius_norm() - 7f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn vacuum_projector_has_rank_one() {
        let s = spec(8);
        let e0 = FockVector::basis(&s, 0);
        let p = e0.outer(&e0);
        assert_eq!(p.numerical_rank(1e-10), 1);
        assert_eq!(p, OperatorMatrix::matrix_unit(&s, 0, 0));
    }

    #[test]
    fn outer_product_convention() {
        // (e_1 ⊗ e_0) e_0 = e_1
        let s = spec(4);
        let a = FockVector::basis(&s, 1).outer(&FockVector::basis(&s, 0));
        let out = a.apply(&FockVector::basis(&s, 0));
        assert_eq!(out.coeffs[1], C64::new(1.0, 0.0));
        assert_eq!(a.entries[(1, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn tensor_of_identities_and_rank() {
        let a = OperatorMatrix::identity(&spec(3));
        let b = OperatorMatrix::identity(&spec(5));
        let t = tensor_product(&a, &b).unwrap();
        assert_eq!(t.entries, DMatrix::identity(15, 15));
        assert_eq!(t.spec.factors(), &[3, 5]);

        let p = OperatorMatrix::matrix_unit(&spec(3), 0, 0);
        let t = tensor_product(&p, &b).unwrap();
        assert_eq!(t.numerical_rank(1e-10), 5);
    }

    #[test]
    fn tensor_guard() {
        let a = OperatorMatrix::identity(&spec(70));
        assert!(matches!(tensor_product(&a, &a), Err(QhaError::DimensionOverflow { .. })));
    }

    #[test]
    fn adjoint_is_conjugate_transpose() {
        let mut a = OperatorMatrix::zeros(&spec(3));
        a.entries[(0, 2)] = C64::new(1.0, 2.0);
        let adj = a.adjoint();
        assert_eq!(adj.entries[(2, 0)], C64::new(1.0, -2.0));
    }
}
