use nalgebra::DMatrix;

use crate::error::{QhaError, Result};
use crate::fock::{FockSpec, OperatorMatrix};
use crate::C64;

/// Relative Frobenius defect below which [`symmetry_class`] accepts a class.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EvenOddSplit {
    pub even_part: OperatorMatrix,
    pub odd_part: OperatorMatrix,
    /// `‖even + odd − A‖_F`.
    pub residual: f64,
}

/// `A_even = ½(A + UAU)`, `A_odd = ½(A − UAU)`.
pub fn even_odd_split(a: &OperatorMatrix) -> EvenOddSplit {
    let deg = a.spec.degrees();
    let (mut even, mut odd) = (a.entries.clone(), a.entries.clone());
    for m in 0..a.dim() {
        for l in 0..a.dim() {
            // (UAU)_{lm} = (−1)^{deg l + deg m} A_{lm}
            let same = (deg[l] + deg[m]).is_multiple_of(2);
            if same {
                odd[(l, m)] = C64::new(0.0, 0.0);
            } else {
                even[(l, m)] = C64::new(0.0, 0.0);
            }
        }
    }
    let residual = (&even + &odd - &a.entries).norm();
    EvenOddSplit {
        even_part: OperatorMatrix::new(a.spec.clone(), even).expect("same shape"),
        odd_part: OperatorMatrix::new(a.spec.clone(), odd).expect("same shape"),
        residual,
    }
}

/// `A` written against `H_even ⊕ H_odd`.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub a11: DMatrix<C64>,
    pub a12: DMatrix<C64>,
    pub a21: DMatrix<C64>,
    pub a22: DMatrix<C64>,
    pub even_indices: Vec<usize>,
    pub odd_indices: Vec<usize>,
}

impl BlockDecomposition {
    pub fn reassemble(&self, spec: &FockSpec) -> OperatorMatrix {
        let mut out = DMatrix::zeros(spec.dim(), spec.dim());
        let blocks = [
            (&self.a11, &self.even_indices, &self.even_indices),
            (&self.a12, &self.even_indices, &self.odd_indices),
            (&self.a21, &self.odd_indices, &self.even_indices),
            (&self.a22, &self.odd_indices, &self.odd_indices),
        ];
        for (b, rows, cols) in blocks {
            for (i, &l) in rows.iter().enumerate() {
                for (j, &m) in cols.iter().enumerate() {
                    out[(l, m)] = b[(i, j)];
                }
            }
        }
        OperatorMatrix::new(spec.clone(), out).expect("same shape")
    }
}

pub fn block_decompose(a: &OperatorMatrix) -> BlockDecomposition {
    let (even, odd) = a.spec.parity_indices();
    let pick =
        |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| a.entries[(rows[i], cols[j])]);
    BlockDecomposition {
        a11: pick(&even, &even),
        a12: pick(&even, &odd),
        a21: pick(&odd, &even),
        a22: pick(&odd, &odd),
        even_indices: even,
        odd_indices: odd,
    }
}

/// Identity on `H_even` and an index-`k` shift on `H_odd`.
///
/// For `k < 0` the odd block is the forward shift `e_{o_j} ↦ e_{o_{j+|k|}}`
/// (injective, cokernel of dimension `|k|`); for `k > 0` it is the backward
/// shift `e_{o_j} ↦ e_{o_{j−k}}`, which kills `e_{o_0}, …, e_{o_{k−1}}`.
pub fn make_even_with_index(k: i64, spec: &FockSpec) -> Result<OperatorMatrix> {
    let d = spec.dim();
    if 4 * k.unsigned_abs() as usize >= d {
        return Err(QhaError::InvalidSpec(format!("|k| = {} must be below D/4 = {}", k.abs(), d as f64 / 4.0)));
    }
    let (even, odd) = spec.parity_indices();
    let mut out = DMatrix::zeros(d, d);
    for &i in &even {
        out[(i, i)] = C64::new(1.0, 0.0);
    }
    let s = k.unsigned_abs() as usize;
    for j in 0..odd.len() {
        if k <= 0 {
            if j + s < odd.len() {
                out[(odd[j + s], odd[j])] = C64::new(1.0, 0.0);
            }
        } else if j >= s {
            out[(odd[j - s], odd[j])] = C64::new(1.0, 0.0);
        }
    }
    OperatorMatrix::new(spec.clone(), out)
}

/// `‖U_θ A U_θ* − θ^m A‖_F / ‖A‖_F` for `m = 0, …, k−1`.
pub fn symmetry_defects(a: &OperatorMatrix, theta: C64, k: usize) -> Result<Vec<f64>> {
    if k == 0 || (theta.powu(k as u32) - 1.0).norm() > 1e-12 {
        return Err(QhaError::InvalidSpec(format!("θ = {theta} is not a root of unity of order {k}")));
    }
    if (theta.norm() - 1.0).abs() > crate::fock::UNIMODULAR_TOL {
        return Err(QhaError::NotUnimodular(theta.norm()));
    }
    let deg = a.spec.degrees();
    let norm = a.frobenius_norm();
    let powers: Vec<C64> = (0..a.dim().max(k) * 2).map(|p| theta.powu(p as u32)).collect();
    let conj = DMatrix::from_fn(a.dim(), a.dim(), |l, m| {
        // θ^{deg l} θ̄^{deg m} = θ^{deg l − deg m mod k}
        let p = (deg[l] as i64 - deg[m] as i64).rem_euclid(k as i64) as usize;
        powers[p] * a.entries[(l, m)]
    });
    Ok((0..k)
        .map(|m| {
            if norm == 0.0 {
                return 0.0;
            }
            (&conj - &a.entries * powers[m]).norm() / norm
        })
        .collect())
}

/// The class `m ∈ {0, …, k−1}` with `U_θ A U_θ* = θ^m A`, if any.
pub fn symmetry_class(a: &OperatorMatrix, theta: C64, k: usize) -> Result<Option<usize>> {
    let defects = symmetry_defects(a, theta, k)?;
    let (m, best) = defects.iter().copied().enumerate().min_by(|x, y| x.1.total_cmp(&y.1)).expect("k ≥ 1");
    Ok((best < SYMMETRY_TOL).then_some(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::parity;

    fn spec(d: usize) -> FockSpec {
        FockSpec::single(d).unwrap()
    }

    fn sample(d: usize) -> OperatorMatrix {
        let e =
            DMatrix::from_fn(d, d, |l, m| C64::new((l * 7 + m * 3) as f64 % 5.0 - 2.0, (l as f64 - m as f64).sin()));
        OperatorMatrix::new(spec(d), e).unwrap()
    }

    #[test]
    fn split_of_parity_is_even() {
        let u = parity(&spec(10));
        let s = even_odd_split(&u);
        assert_eq!(s.even_part, u);
        assert_eq!(s.odd_part.frobenius_norm(), 0.0);
    }

    #[test]
    fn split_reconstructs_and_is_idempotent() {
        let a = sample(9);
        let s = even_odd_split(&a);
        assert!(s.residual < 1e-13);
        let again = even_odd_split(&s.even_part);
        assert_eq!(again.odd_part.frobenius_norm(), 0.0);
        let u = parity(&a.spec);
        let conj = &(&u * &s.odd_part) * &u;
        assert!((conj.entries + &s.odd_part.entries).norm() < 1e-12);
    }

    #[test]
    fn blocks_reassemble() {
        let a = sample(7);
        let b = block_decompose(&a);
        assert_eq!(b.reassemble(&a.spec), a);
        let u = block_decompose(&parity(&spec(7)));
        assert_eq!(u.a12.norm(), 0.0);
        assert_eq!(u.a11, DMatrix::identity(4, 4));
        assert_eq!(u.a22, -DMatrix::<C64>::identity(3, 3));
    }

    #[test]
    fn make_even_blocks() {
        assert_eq!(make_even_with_index(0, &spec(16)).unwrap(), OperatorMatrix::identity(&spec(16)));
        assert!(make_even_with_index(4, &spec(16)).is_err());
        let a = make_even_with_index(-2, &spec(20)).unwrap();
        assert_eq!(symmetry_class(&a, C64::new(-1.0, 0.0), 2).unwrap(), Some(0));
        // forward shift by two odd slots: e_1 ↦ e_5
        assert_eq!(a.entries[(5, 1)], C64::new(1.0, 0.0));
        let b = make_even_with_index(1, &spec(20)).unwrap();
        assert_eq!(b.entries[(1, 3)], C64::new(1.0, 0.0));
        assert_eq!(b.entries.column(1).norm(), 0.0);
    }

    #[test]
    fn symmetry_classes() {
        let s = spec(12);
        let theta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut shift = OperatorMatrix::zeros(&s);
        for m in 0..11 {
            shift.entries[(m + 1, m)] = C64::new(1.0, 0.0);
        }
        assert_eq!(symmetry_class(&shift, C64::new(-1.0, 0.0), 2).unwrap(), Some(1));
        assert_eq!(symmetry_class(&shift, theta, 3).unwrap(), Some(1));
        assert_eq!(symmetry_class(&sample(12), C64::new(-1.0, 0.0), 2).unwrap(), None);
        assert!(symmetry_class(&shift, C64::new(0.0, 1.0), 3).is_err());
    }
}
