use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operator::{op_norm, FockVector, OperatorMatrix};
use super::spec::{FockSpec, PhasePoint};
use crate::error::{QhaError, Result};
use crate::special::{ln_factorial, poisson_tail};
use crate::C64;

/// Tolerance on `|θ| − 1` accepted by [`parity_rotation`].
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// `ln ‖z^m‖ = ½ (m ln 2 + ln m!)` in `L²(μ)`, `dμ = (2π)⁻¹ e^{−|z|²/2} dz`.
pub fn ln_monomial_norm(m: usize) -> f64 {
    0.5 * (m as f64 * std::f64::consts::LN_2 + ln_factorial(m))
}

/// `‖z^m‖ = √(2^m m!)`.
pub fn monomial_norm(m: usize) -> f64 {
    ln_monomial_norm(m).exp()
}

/// Displacement parameter `α = z̄/√2` of `W_z` in the ladder-operator picture.
pub fn displacement(z: C64) -> C64 {
    z.conj() / std::f64::consts::SQRT_2
}

/// A truncated coherent state together with the mass it lost to truncation.
#[derive(Clone, Debug)]
pub struct CoherentState {
    pub vector: FockVector,
    /// Squared norm of the discarded coefficients (exact Poisson tail).
    pub tail: f64,
    /// Set when `|z|²/2 > D/4` for some factor.
    pub tail_warning: bool,
}

/// Single-mode coherent coefficients `e^{−|z|²/4} z̄^m / √(2^m m!)`.
pub fn coherent_coefficients(z: C64, dim: usize) -> Vec<C64> {
    let r = z.norm();
    let phase = z.conj().arg();
    (0..dim)
        .map(|m| {
            if r == 0.0 {
                return if m == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            }
            let ln_mod = -r * r / 4.0 + m as f64 * r.ln() - ln_monomial_norm(m);
            C64::from_polar(ln_mod.exp(), m as f64 * phase)
        })
        .collect()
}

/// Normalized reproducing kernel `k_z` in the truncated basis.
pub fn coherent_state(z: &PhasePoint, spec: &FockSpec) -> Result<CoherentState> {
    check_point(z, spec)?;
    let mut coeffs = DVector::from_element(1, C64::new(1.0, 0.0));
    let mut kept = 1.0;
    let mut warning = false;
    for (&zk, &d) in z.coords().iter().zip(spec.factors()) {
        let c = DVector::from_vec(coherent_coefficients(zk, d));
        coeffs = coeffs.kronecker(&c);
        let mean = zk.norm_sqr() / 2.0;
        kept *= 1.0 - poisson_tail(mean, d);
        warning |= mean > d as f64 / 4.0;
    }
    Ok(CoherentState {
        vector: FockVector { spec: spec.clone(), coeffs },
        tail: (1.0 - kept).max(0.0),
        tail_warning: warning,
    })
}

/// Truncation tail of `W_z e₀`, i.e. of the coherent state at `z`.
pub fn weyl_tail(z: &PhasePoint, spec: &FockSpec) -> f64 {
    let kept: f64 =
        z.coords().iter().zip(spec.factors()).map(|(zk, &d)| 1.0 - poisson_tail(zk.norm_sqr() / 2.0, d)).product();
    (1.0 - kept).max(0.0)
}

struct Jacobi {
    q: DMatrix<f64>,
    lambda: Vec<f64>,
}

// Eigendecomposition of the truncated position operator a + a†.
fn jacobi(dim: usize) -> Arc<Jacobi> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Jacobi>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(j) = cache.lock().unwrap().get(&dim) {
        return j.clone();
    }
    let mut x = DMatrix::<f64>::zeros(dim, dim);
    for m in 1..dim {
        let s = (m as f64).sqrt();
        x[(m - 1, m)] = s;
        x[(m, m - 1)] = s;
    }
    let eig = SymmetricEigen::new(x);
    let j = Arc::new(Jacobi { q: eig.eigenvectors, lambda: eig.eigenvalues.iter().copied().collect() });
    cache.lock().unwrap().insert(dim, j.clone());
    j
}

/// Truncated `W_z` on one mode: `exp(α a† − ᾱ a)` of the truncated ladder
/// operators, `α = z̄/√2`.
pub fn weyl_single(z: C64, dim: usize) -> DMatrix<C64> {
    if z == C64::new(0.0, 0.0) {
        return DMatrix::identity(dim, dim);
    }
    let alpha = displacement(z);
    let r = alpha.norm();
    // α a† − ᾱ a = −i r V (a + a†) V*,  V = diag(e^{imψ}),  ψ = arg α + π/2
    let psi = alpha.arg() + std::f64::consts::FRAC_PI_2;
    let j = jacobi(dim);
    let mut qc = j.q.clone();
    let mut qs = j.q.clone();
    for (col, &l) in j.lambda.iter().enumerate() {
        let (s, c) = (r * l).sin_cos();
        qc.column_mut(col).scale_mut(c);
        qs.column_mut(col).scale_mut(s);
    }
    let re = &qc * j.q.transpose();
    let im = &qs * j.q.transpose();
    DMatrix::from_fn(dim, dim, |l, m| {
        let phase = C64::from_polar(1.0, (l as f64 - m as f64) * psi);
        phase * C64::new(re[(l, m)], -im[(l, m)])
    })
}

/// Truncated Weyl operator `W_z` on `spec` (Kronecker product over factors).
pub fn weyl_operator(z: &PhasePoint, spec: &FockSpec) -> OperatorMatrix {
    assert_eq!(z.n(), spec.n(), "phase point and spec disagree on n");
    let entries = z
        .coords()
        .iter()
        .zip(spec.factors())
        .map(|(&zk, &d)| weyl_single(zk, d))
        .reduce(|acc, w| acc.kronecker(&w))
        .expect("spec has at least one factor");
    OperatorMatrix::from_entries(spec.clone(), entries)
}

/// Exact matrix elements `⟨W_z e_m, e_l⟩` of the untruncated single-mode
/// Weyl operator for `l < rows`, `m < cols`.
///
/// Each diagonal offset `k` is filled by the normalized three-term Laguerre
/// recurrence, so no factorial or polynomial is formed explicitly.
pub fn weyl_elements(z: C64, rows: usize, cols: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(rows, cols);
    let alpha = displacement(z);
    let x = alpha.norm_sqr();
    let r = alpha.norm();
    let phi = alpha.arg();
    let max_k = rows.max(cols);
    for k in 0..max_k {
        // lower diagonal: (n + k, n); upper diagonal: (n, n + k)
        let len_lower = if k < rows { (rows - k).min(cols) } else { 0 };
        let len_upper = if k > 0 && k < cols { (cols - k).min(rows) } else { 0 };
        let len = len_lower.max(len_upper);
        if len == 0 {
            continue;
        }
        let mags = laguerre_band(k, x, r, len);
        let lower_phase = C64::from_polar(1.0, k as f64 * phi);
        let upper_phase = C64::from_polar(if k % 2 == 0 { 1.0 } else { -1.0 }, -(k as f64) * phi);
        for (n, &mag) in mags.iter().enumerate() {
            if n < len_lower {
                out[(n + k, n)] = lower_phase * mag;
            }
            if n < len_upper {
                out[(n, n + k)] = upper_phase * mag;
            }
        }
    }
    out
}

// M_n = √(n!/(n+k)!) r^k e^{−x/2} L_n^{(k)}(x), n < len.
fn laguerre_band(k: usize, x: f64, r: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let m0 = if r == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (k as f64 * r.ln() - 0.5 * ln_factorial(k) - x / 2.0).exp()
    };
    out.push(m0);
    let kf = k as f64;
    let mut prev = 0.0;
    let mut cur = m0;
    for n in 1..len {
        let nf = (n - 1) as f64;
        let next =
            ((2.0 * nf + 1.0 + kf - x) * cur - (nf * (nf + kf)).sqrt() * prev) / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Diagonal `⟨W_z e_m, e_m⟩ = e^{−|z|²/4} L_m(|z|²/2)`, `m < len`, of the
/// untruncated Weyl operator.
pub fn weyl_diagonal(z: C64, len: usize) -> Vec<f64> {
    let alpha = displacement(z);
    laguerre_band(0, alpha.norm_sqr(), alpha.norm(), len)
}

/// Compression of the untruncated `W_z` to `spec`, built from exact elements.
pub fn weyl_exact(z: &PhasePoint, spec: &FockSpec) -> OperatorMatrix {
    assert_eq!(z.n(), spec.n(), "phase point and spec disagree on n");
    let entries = z
        .coords()
        .iter()
        .zip(spec.factors())
        .map(|(&zk, &d)| weyl_elements(zk, d, d))
        .reduce(|acc, w| acc.kronecker(&w))
        .expect("spec has at least one factor");
    OperatorMatrix::from_entries(spec.clone(), entries)
}

/// Operator norm of `W_z W_w − e^{−iσ(z,w)/2} W_{z+w}` on the top-left
/// `block × block` submatrix.
pub fn ccr_defect(z: &PhasePoint, w: &PhasePoint, spec: &FockSpec, block: usize) -> Result<f64> {
    if block == 0 || block > spec.dim() {
        return Err(QhaError::InvalidSpec(format!("block {block} outside 1..={}", spec.dim())));
    }
    check_point(z, spec)?;
    check_point(w, spec)?;
    let wz = weyl_operator(z, spec);
    let ww = weyl_operator(w, spec);
    let wzw = weyl_operator(&z.add(w), spec);
    let phase = C64::from_polar(1.0, -z.symplectic(w) / 2.0);
    let diff = &(&wz * &ww).entries - &wzw.entries * phase;
    Ok(op_norm(&diff.view((0, 0), (block, block)).into_owned()))
}

/// Parity operator `Uf(z) = f(−z)`: diagonal `(−1)^{deg m}`.
pub fn parity(spec: &FockSpec) -> OperatorMatrix {
    let diag: Vec<C64> =
        spec.degrees().into_iter().map(|d| C64::new(if d % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    OperatorMatrix::from_diagonal(spec, &diag)
}

/// `U_Θ f(z) = f(Θz)` for a diagonal unitary `Θ = diag(θ₁, …, θ_n)`.
///
/// A single phase applies to every factor (`Θ = θ·I`).
pub fn parity_rotation(theta: &[C64], spec: &FockSpec) -> Result<OperatorMatrix> {
    let phases = expand_theta(theta, spec)?;
    let diag: Vec<C64> = (0..spec.dim())
        .map(|i| spec.multi_index(i).iter().zip(&phases).map(|(&a, t)| t.powu(a as u32)).product())
        .collect();
    Ok(OperatorMatrix::from_diagonal(spec, &diag))
}

pub(crate) fn expand_theta(theta: &[C64], spec: &FockSpec) -> Result<Vec<C64>> {
    if let Some(t) = theta.iter().find(|t| (t.norm() - 1.0).abs() > UNIMODULAR_TOL) {
        return Err(QhaError::NotUnimodular(t.norm()));
    }
    match theta.len() {
        1 => Ok(vec![theta[0]; spec.n()]),
        n if n == spec.n() => Ok(theta.to_vec()),
        n => Err(QhaError::DimensionMismatch(format!("{n} phases for n = {}", spec.n()))),
    }
}

/// `α_z(A) = W_z A W_z*`.
pub fn shift_alpha(a: &OperatorMatrix, z: &PhasePoint) -> OperatorMatrix {
    let w = weyl_operator(z, &a.spec);
    &(&w * a) * &w.adjoint()
}

/// Modulation `γ_z(A) = W_{z/2} A W_{z/2}`.
pub fn modulation_gamma(a: &OperatorMatrix, z: &PhasePoint) -> OperatorMatrix {
    let w = weyl_operator(&z.scale(0.5), &a.spec);
    &(&w * a) * &w
}

fn check_point(z: &PhasePoint, spec: &FockSpec) -> Result<()> {
    if z.n() != spec.n() {
        return Err(QhaError::DimensionMismatch(format!(
            "phase point has {} coordinates, spec has n = {}",
            z.n(),
            spec.n()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::tensor_product;

    fn spec(d: usize) -> FockSpec {
        FockSpec::single(d).unwrap()
    }

    fn p(re: f64, im: f64) -> PhasePoint {
        PhasePoint::single(C64::new(re, im))
    }

    #[test]
    fn monomial_norms() {
        assert_eq!(monomial_norm(0), 1.0);
        assert!((monomial_norm(1) - 2f64.sqrt()).abs() < 1e-14);
        assert!((monomial_norm(2) - 8f64.sqrt()).abs() < 1e-14);
        assert!(ln_monomial_norm(5000).is_finite());
    }

    #[test]
    fn coherent_state_basics() {
        let s = spec(64);
        let k0 = coherent_state(&p(0.0, 0.0), &s).unwrap();
        assert_eq!(k0.vector, FockVector::basis(&s, 0));
        let k = coherent_state(&p(1.3, -0.7), &s).unwrap();
        assert!((k.vector.norm() - 1.0).abs() <= k.tail + 1e-14);
        assert!(!k.tail_warning);
        let k2 = coherent_state(&p(2.0, 0.0), &s).unwrap();
        assert!((k2.vector.inner(&k0.vector).norm() - (-1f64).exp()).abs() < 1e-14);
        assert!(coherent_state(&p(8.0, 0.0), &spec(16)).unwrap().tail_warning);
    }

    #[test]
    fn weyl_zero_is_identity() {
        let w = weyl_operator(&p(0.0, 0.0), &spec(10));
        assert_eq!(w.entries, DMatrix::identity(10, 10));
    }

    #[test]
    fn weyl_maps_vacuum_to_coherent_state() {
        let s = spec(64);
        let z = p(0.8, 0.6);
        let w = weyl_operator(&z, &s);
        let k = coherent_state(&z, &s).unwrap();
        let out = w.apply(&FockVector::basis(&s, 0));
        assert!((&out.coeffs - &k.vector.coeffs).norm() < 1e-12);
        assert!((w.entries[(0, 0)].re - (-0.25f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn truncated_weyl_is_unitary_and_inverted_by_negation() {
        let s = spec(40);
        let z = p(1.1, 0.4);
        let w = weyl_operator(&z, &s);
        let wm = weyl_operator(&z.neg(), &s);
        let id = DMatrix::<C64>::identity(40, 40);
        assert!((&w.entries * w.entries.adjoint() - &id).norm() < 1e-12);
        assert!((&w.entries * &wm.entries - &id).norm() < 1e-12);
    }

    #[test]
    fn exact_elements_match_truncated_on_interior() {
        let z = C64::new(-0.9, 1.2);
        let exact = weyl_elements(z, 20, 20);
        let trunc = weyl_single(z, 96);
        let diff = &exact - trunc.view((0, 0), (20, 20));
        assert!(diff.norm() < 1e-11, "{}", diff.norm());
    }

    #[test]
    fn exact_elements_rectangular() {
        let z = C64::new(0.3, -0.5);
        let full = weyl_elements(z, 12, 12);
        let rect = weyl_elements(z, 5, 12);
        assert_eq!(rect, full.view((0, 0), (5, 12)).into_owned());
        let rect = weyl_elements(z, 12, 4);
        assert_eq!(rect, full.view((0, 0), (12, 4)).into_owned());
    }

    #[test]
    fn ccr_phase_example() {
        let d = ccr_defect(&p(1.0, 0.0), &p(0.0, 1.0), &spec(64), 32).unwrap();
        assert!(d < 1e-8, "{d}");
        assert!(ccr_defect(&p(1.0, 0.0), &p(0.0, 1.0), &spec(8), 9).is_err());
    }

    #[test]
    fn parity_and_rotations() {
        let s = spec(9);
        let u = parity(&s);
        assert_eq!((&u * &u).entries, DMatrix::identity(9, 9));
        assert_eq!(u.entries[(1, 1)], C64::new(-1.0, 0.0));
        let um = parity_rotation(&[C64::new(-1.0, 0.0)], &s).unwrap();
        assert_eq!(um, u);
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let r = parity_rotation(&[w], &s).unwrap();
        let cube = &(&r * &r) * &r;
        assert!((cube.entries - DMatrix::<C64>::identity(9, 9)).norm() < 1e-14);
        assert!(matches!(parity_rotation(&[C64::new(1.1, 0.0)], &s), Err(QhaError::NotUnimodular(_))));
    }

    #[test]
    fn parity_intertwines_weyl_exactly() {
        let s = spec(64);
        let u = parity(&s);
        let z = p(1.4, -0.3);
        let lhs = &weyl_operator(&z, &s) * &u;
        let rhs = &u * &weyl_operator(&z.neg(), &s);
        assert!((lhs.entries - rhs.entries).norm() < 1e-12);
    }

    #[test]
    fn product_parity_is_tensor_of_parities() {
        let a = parity(&spec(4));
        let b = parity(&spec(5));
        let t = tensor_product(&a, &b).unwrap();
        assert_eq!(t, parity(&FockSpec::product(&[4, 5]).unwrap()));
    }

    #[test]
    fn shift_alpha_fixes_identity() {
        let s = spec(64);
        let id = OperatorMatrix::identity(&s);
        let out = shift_alpha(&id, &p(0.7, 0.7));
        let diff = (out.entries - &id.entries).view((0, 0), (32, 32)).norm();
        assert!(diff < 1e-8);
    }
}
