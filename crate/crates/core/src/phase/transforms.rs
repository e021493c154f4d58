use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::{ConventionParams, Grid, GridSymbol};
use crate::error::{QhaError, Result};
use crate::fock::{weyl_diagonal, weyl_elements, FockSpec, OperatorMatrix};
use crate::special::neville_at_zero;
use crate::C64;

/// Boundary-to-peak ratio above which [`symplectic_fourier_checked`] reports aliasing.
pub const ALIAS_TOL: f64 = 1e-8;
/// Boundary-to-peak ratio above which [`inverse_fourier_weyl`] rejects a symbol.
pub const SYNTHESIS_DECAY_TOL: f64 = 1e-4;

/// `F_σ f` sampled on the input grid (separable matrix DFT).
pub fn symplectic_fourier(f: &GridSymbol, conv: &ConventionParams) -> GridSymbol {
    symplectic_fourier_to(f, conv, f.grid)
}

/// As [`symplectic_fourier`], rejecting inputs that do not decay at the boundary.
pub fn symplectic_fourier_checked(f: &GridSymbol, conv: &ConventionParams) -> Result<GridSymbol> {
    let ratio = f.boundary_ratio();
    if ratio > ALIAS_TOL {
        return Err(QhaError::BoundaryDecay(ratio));
    }
    Ok(symplectic_fourier(f, conv))
}

/// `F_σ f(z) = c_σ h² Σ_w f(w) e^{i s σ(w, z)}` at the nodes of `out`.
///
/// With `σ(w, z) = w_y z_x − w_x z_y` the kernel factors into an
/// `(w_y, z_x)` part and a `(w_x, z_y)` part, so the sum is two dense
/// matrix products.
pub fn symplectic_fourier_to(f: &GridSymbol, conv: &ConventionParams, out: Grid) -> GridSymbol {
    let s = conv.fourier_phase_scale;
    let n_in = f.grid.points;
    let n_out = out.points;
    let x_in = f.grid.coords();
    let x_out = out.coords();
    let input = DMatrix::from_row_slice(n_in, n_in, &f.samples);
    // my[(i2, k1)] = e^{i s y_{i2} X_{k1}},  mx[(i1, k2)] = e^{−i s x_{i1} Y_{k2}}
    let my = DMatrix::from_fn(n_in, n_out, |i, k| C64::from_polar(1.0, s * x_in[i] * x_out[k]));
    let mx = DMatrix::from_fn(n_in, n_out, |i, k| C64::from_polar(1.0, -s * x_in[i] * x_out[k]));
    let t = &input * &my; // (i1, k1)
    let res = t.transpose() * &mx; // (k1, k2)
    let scale = conv.fourier_prefactor * f.grid.cell();
    let mut samples = Vec::with_capacity(n_out * n_out);
    for k1 in 0..n_out {
        for k2 in 0..n_out {
            samples.push(res[(k1, k2)] * scale);
        }
    }
    GridSymbol { grid: out, samples, provenance: format!("F_sigma({})", f.provenance) }
}

/// `F_σ f` by a 2D FFT, landing on [`Grid::dual`].
pub fn symplectic_fourier_fft(f: &GridSymbol, conv: &ConventionParams) -> Result<GridSymbol> {
    let s = conv.fourier_phase_scale;
    if s == 0.0 {
        return Err(QhaError::InvalidSpec("phase scale must be nonzero".into()));
    }
    let n = f.grid.points;
    let half = n / 2;
    let dual = f.grid.dual(s)?;
    // g[a mod N][b mod N] = f[a + N/2][b + N/2]
    let mut g = vec![C64::new(0.0, 0.0); n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let a = (i1 + half) % n;
            let b = (i2 + half) % n;
            g[a * n + b] = f.get(i1, i2);
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in g.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for b in 0..n {
        for a in 0..n {
            col[a] = g[a * n + b];
        }
        fft.process(&mut col);
        for a in 0..n {
            g[a * n + b] = col[a];
        }
    }
    let sgn: i64 = if s > 0.0 { 1 } else { -1 };
    let scale = conv.fourier_prefactor * f.grid.cell();
    let ni = n as i64;
    let mut samples = Vec::with_capacity(n * n);
    for k1 in 0..n {
        for k2 in 0..n {
            let u = k1 as i64 - half as i64;
            let v = k2 as i64 - half as i64;
            let p = (sgn * v).rem_euclid(ni) as usize;
            let q = (-sgn * u).rem_euclid(ni) as usize;
            samples.push(g[p * n + q] * scale);
        }
    }
    Ok(GridSymbol { grid: dual, samples, provenance: format!("F_sigma_fft({})", f.provenance) })
}

/// Size of the smallest leading block containing every nonzero entry.
pub fn support_size(a: &OperatorMatrix) -> usize {
    let d = a.dim();
    let mut s = 0;
    for l in 0..d {
        for m in 0..d {
            if a.entries[(l, m)] != C64::new(0.0, 0.0) {
                s = s.max(l.max(m) + 1);
            }
        }
    }
    s
}

/// `F_W(A)(ξ) = Tr(A W_ξ*)` at one point, using exact elements of `W_{−ξ}`.
pub fn fourier_weyl_point(a: &OperatorMatrix, xi: C64) -> C64 {
    let s = support_size(a);
    trace_against(a, s, xi)
}

fn trace_against(a: &OperatorMatrix, s: usize, xi: C64) -> C64 {
    if s == 0 {
        return C64::new(0.0, 0.0);
    }
    let w = weyl_elements(-xi, s, s);
    let mut acc = C64::new(0.0, 0.0);
    for l in 0..s {
        for m in 0..s {
            acc += a.entries[(l, m)] * w[(m, l)];
        }
    }
    acc
}

/// `F_W(A)` sampled on `grid` (single-mode `A`).
pub fn fourier_weyl(a: &OperatorMatrix, grid: Grid) -> Result<GridSymbol> {
    if !a.spec.is_single() {
        return Err(QhaError::InvalidSpec("Fourier–Weyl transform is single-mode".into()));
    }
    let s = support_size(a);
    let n = grid.points;
    let samples = (0..grid.len()).into_par_iter().map(|k| trace_against(a, s, grid.point(k / n, k % n))).collect();
    Ok(GridSymbol { grid, samples, provenance: "F_W".into() })
}

/// `F_W⁻¹ f = c_H h² Σ_ξ f(ξ) W_ξ`, rejecting symbols that do not decay.
pub fn inverse_fourier_weyl(f: &GridSymbol, spec: &FockSpec, conv: &ConventionParams) -> Result<OperatorMatrix> {
    let ratio = f.boundary_ratio();
    if ratio > SYNTHESIS_DECAY_TOL {
        return Err(QhaError::BoundaryDecay(ratio));
    }
    inverse_fourier_weyl_unchecked(f, spec, conv)
}

/// The synthesis sum without the boundary check (for symbols such as the
/// transform of a point mass, which are not integrable).
pub fn inverse_fourier_weyl_unchecked(
    f: &GridSymbol,
    spec: &FockSpec,
    conv: &ConventionParams,
) -> Result<OperatorMatrix> {
    if !spec.is_single() {
        return Err(QhaError::InvalidSpec("Fourier–Weyl synthesis is single-mode".into()));
    }
    let d = spec.dim();
    let n = f.grid.points;
    // one partial sum per grid row, combined in row order for reproducibility
    let rows: Vec<DMatrix<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = DMatrix::<C64>::zeros(d, d);
            for j in 0..n {
                let v = f.get(i, j);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                acc += weyl_elements(f.grid.point(i, j), d, d) * v;
            }
            acc
        })
        .collect();
    let mut total = DMatrix::<C64>::zeros(d, d);
    for r in rows {
        total += r;
    }
    total *= C64::new(conv.haar_normalization * f.grid.cell(), 0.0);
    OperatorMatrix::new(spec.clone(), total)
}

/// Weyl quantization `op(f) = F_W⁻¹(F_σ f)`; `F_σ f` must decay at the boundary.
pub fn weyl_quantize(f: &GridSymbol, spec: &FockSpec, conv: &ConventionParams) -> Result<OperatorMatrix> {
    inverse_fourier_weyl(&symplectic_fourier(f, conv), spec, conv)
}

/// As [`weyl_quantize`] for symbols whose transform fills the box (point-mass approximants).
pub fn weyl_quantize_unchecked(f: &GridSymbol, spec: &FockSpec, conv: &ConventionParams) -> Result<OperatorMatrix> {
    inverse_fourier_weyl_unchecked(&symplectic_fourier(f, conv), spec, conv)
}

/// The Weyl symbol `F_σ(F_W(A))`, inverse to [`weyl_quantize`] for involutive `F_σ`.
pub fn weyl_symbol(a: &OperatorMatrix, grid: Grid, conv: &ConventionParams) -> Result<GridSymbol> {
    Ok(symplectic_fourier(&fourier_weyl(a, grid)?, conv))
}

/// `F_op = F_W⁻¹ ∘ F_σ ∘ F_W`.
pub fn operator_fourier(a: &OperatorMatrix, grid: Grid, conv: &ConventionParams) -> Result<OperatorMatrix> {
    let fw = fourier_weyl(a, grid)?;
    inverse_fourier_weyl_unchecked(&symplectic_fourier(&fw, conv), &a.spec, conv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbelOptions {
    /// Number of damping parameters fed to the extrapolation.
    pub nodes: usize,
    /// Smallest `t = 1 − r` is chosen so that `r^len ≤ e^{−decay}`.
    pub decay: f64,
    /// Largest accepted change of the last extrapolation column.
    pub tol: f64,
}

impl Default for AbelOptions {
    fn default() -> Self {
        Self { nodes: 8, decay: 40.0, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelTrace {
    pub value: C64,
    pub error_estimate: f64,
    pub damping: Vec<f64>,
}

/// `lim_{r→1⁻} Σ r^m a_m` by polynomial extrapolation in `t = 1 − r`.
///
/// The sums are formed at `t` values large enough that `r^len` is
/// negligible, so the finite diagonal behaves like the infinite one.
pub fn regularized_trace(diag: &[C64], opts: &AbelOptions) -> Result<AbelTrace> {
    let len = diag.len();
    if len == 0 || opts.nodes < 2 {
        return Err(QhaError::InvalidSpec("Abel summation needs a diagonal and at least two nodes".into()));
    }
    let t_min = opts.decay / len as f64;
    if t_min >= 0.5 {
        return Err(QhaError::Extrapolation(t_min));
    }
    let t_max = (2.0 * t_min).min(0.95);
    let ts: Vec<f64> = (0..opts.nodes).map(|j| t_min + (t_max - t_min) * j as f64 / (opts.nodes - 1) as f64).collect();
    let sums: Vec<C64> = ts
        .iter()
        .map(|&t| {
            let r = 1.0 - t;
            let mut p = 1.0;
            let mut acc = C64::new(0.0, 0.0);
            for &a in diag {
                acc += a * p;
                p *= r;
            }
            acc
        })
        .collect();
    let (value, err) = neville_at_zero(&ts, &sums);
    if err > opts.tol {
        return Err(QhaError::Extrapolation(err));
    }
    Ok(AbelTrace { value, error_estimate: err, damping: ts })
}

/// Abel-regularized trace of an operator matrix's diagonal.
pub fn regularized_operator_trace(a: &OperatorMatrix, opts: &AbelOptions) -> Result<AbelTrace> {
    let diag: Vec<C64> = (0..a.dim()).map(|m| a.entries[(m, m)]).collect();
    regularized_trace(&diag, opts)
}

/// Abel-regularized `Tr(U W_ξ*)` from `terms` exact diagonal elements.
pub fn fourier_weyl_parity(xi: C64, terms: usize, opts: &AbelOptions) -> Result<AbelTrace> {
    let diag: Vec<C64> = weyl_diagonal(-xi, terms)
        .into_iter()
        .enumerate()
        .map(|(m, v)| C64::new(if m % 2 == 0 { v } else { -v }, 0.0))
        .collect();
    regularized_trace(&diag, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss(grid: Grid, a: f64) -> GridSymbol {
        GridSymbol::sample(grid, move |z| C64::new((-a * z.norm_sqr()).exp(), 0.0), "gauss")
    }

    #[test]
    fn full_phase_gaussian_is_self_dual() {
        let g = Grid::new(10.0, 128).unwrap();
        let f = gauss(g, 0.5);
        let out = symplectic_fourier(&f, &ConventionParams::full_phase());
        assert!(out.max_diff(&f).unwrap() < 1e-10);
    }

    #[test]
    fn fft_route_agrees_with_matrix_route() {
        let g = Grid::new(10.0, 64).unwrap();
        let f = GridSymbol::sample(g, |z| C64::new((-(z - C64::new(0.7, -0.4)).norm_sqr()).exp(), z.re * 0.1), "bump");
        for conv in [ConventionParams::audited(), ConventionParams::full_phase()] {
            let fast = symplectic_fourier_fft(&f, &conv).unwrap();
            let direct = symplectic_fourier_to(&f, &conv, fast.grid);
            assert!(fast.max_diff(&direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn involution_for_both_conventions() {
        let g = Grid::new(10.0, 128).unwrap();
        // each convention has its own self-dual width, 4 for half phase and 2 for full phase
        for (conv, w) in [(ConventionParams::audited(), 4.0), (ConventionParams::full_phase(), 2.0)] {
            let f =
                GridSymbol::sample(g, move |z| C64::new((-(z - C64::new(1.0, 0.5)).norm_sqr() / w).exp(), 0.0), "b");
            let twice = symplectic_fourier(&symplectic_fourier(&f, &conv), &conv);
            assert!(twice.max_diff(&f).unwrap() < 1e-8);
        }
    }

    #[test]
    fn vacuum_fourier_weyl_and_round_trip() {
        let s = FockSpec::single(24).unwrap();
        let a = OperatorMatrix::matrix_unit(&s, 0, 0);
        let g = Grid::new(10.0, 64).unwrap();
        let fw = fourier_weyl(&a, g).unwrap();
        let oracle = gauss(g, 0.25);
        assert!(fw.max_diff(&oracle).unwrap() < 1e-13);
        let back = inverse_fourier_weyl(&fw, &s, &ConventionParams::audited()).unwrap();
        assert!((back.entries - a.entries).norm() < 1e-10);
        let off = OperatorMatrix::matrix_unit(&s, 0, 1);
        assert!(fourier_weyl_point(&off, C64::new(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn abel_traces() {
        let s = FockSpec::single(400).unwrap();
        let v = regularized_operator_trace(&OperatorMatrix::matrix_unit(&s, 0, 0), &AbelOptions::default()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-12);
        let u = regularized_operator_trace(&crate::fock::parity(&s), &AbelOptions::default()).unwrap();
        assert!((u.value - 0.5).norm() < 1e-8, "{:?}", u);
        for xi in [C64::new(0.0, 0.0), C64::new(1.0, 2.0), C64::new(-3.0, 0.5)] {
            let t = fourier_weyl_parity(xi, 4000, &AbelOptions::default()).unwrap();
            assert!((t.value - 0.5).norm() < 1e-6, "{xi}: {:?}", t.value);
        }
        assert!(matches!(
            regularized_trace(&[C64::new(1.0, 0.0); 10], &AbelOptions::default()),
            Err(QhaError::Extrapolation(_))
        ));
        let _ = PI;
    }
}
