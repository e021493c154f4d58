use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::symbol::SymbolFn;
use crate::error::{QhaError, Result};
use crate::fock::{ln_monomial_norm, FockSpec, OperatorMatrix};
use crate::special::gauss_legendre;
use crate::C64;

/// Polar quadrature against `r e^{−r²/2} dr dθ`.
///
/// The radial axis `[0, √(2D+1) + extent_pad]` is split into Gauss–Legendre
/// panels; the angular integral is either selected exactly from the
/// symbol's angular modes or computed by an FFT over `angular_nodes`
/// equispaced samples (default `2D + 32`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureScheme {
    pub panel_width: f64,
    pub order: usize,
    pub extent_pad: f64,
    pub angular_nodes: Option<usize>,
    /// Largest entry change tolerated between the scheme and its refinement.
    pub tol: f64,
    pub check_convergence: bool,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self { panel_width: 0.5, order: 10, extent_pad: 10.0, angular_nodes: None, tol: 1e-10, check_convergence: true }
    }
}

impl QuadratureScheme {
    /// Halved panels and doubled angular sampling.
    pub fn refined(&self, dim: usize) -> Self {
        Self { panel_width: self.panel_width / 2.0, angular_nodes: Some(2 * self.angular_count(dim)), ..self.clone() }
    }

    pub fn angular_count(&self, dim: usize) -> usize {
        self.angular_nodes.unwrap_or(2 * dim + 32)
    }

    /// Radial nodes and weights (the weights include the Jacobian `r`).
    pub fn radial_rule(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let extent = (2.0 * dim as f64 + 1.0).sqrt() + self.extent_pad;
        let panels = (extent / self.panel_width).ceil() as usize;
        let h = extent / panels as f64;
        let (x, w) = gauss_legendre(self.order);
        let mut nodes = Vec::with_capacity(panels * self.order);
        let mut weights = Vec::with_capacity(panels * self.order);
        for p in 0..panels {
            let a = p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                let r = a + 0.5 * h * (xi + 1.0);
                nodes.push(r);
                weights.push(0.5 * h * wi * r);
            }
        }
        (nodes, weights)
    }
}

#[derive(Clone, Debug)]
pub struct ToeplitzReport {
    pub operator: OperatorMatrix,
    /// Largest entry change between the base and the refined scheme.
    pub refinement_change: Option<f64>,
    pub radial_nodes: usize,
    pub angular_nodes: Option<usize>,
    /// Largest `|f|` seen at the quadrature nodes.
    pub sampled_sup: f64,
}

/// `T_f` with entries `⟨T_f e_m, e_l⟩ = ∫ f e_m ē_l dμ`.
pub fn toeplitz(f: &SymbolFn, spec: &FockSpec, scheme: &QuadratureScheme) -> Result<OperatorMatrix> {
    Ok(toeplitz_with_report(f, spec, scheme)?.operator)
}

pub fn toeplitz_with_report(f: &SymbolFn, spec: &FockSpec, scheme: &QuadratureScheme) -> Result<ToeplitzReport> {
    if !spec.is_single() {
        return Err(QhaError::InvalidSpec("Toeplitz quadrature needs a single-mode spec; use tensor_product".into()));
    }
    let d = spec.dim();
    let (base, sup) = entries(f, d, scheme);
    let (entries, change) = if scheme.check_convergence {
        let fine_scheme = scheme.refined(d);
        let (fine, _) = entries(f, d, &fine_scheme);
        let change = (&fine - &base).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if change > scheme.tol {
            return Err(QhaError::QuadratureNonConvergence { change, tol: scheme.tol });
        }
        (fine, Some(change))
    } else {
        (base, None)
    };
    let (nodes, _) = scheme.radial_rule(d);
    Ok(ToeplitzReport {
        operator: OperatorMatrix::new(spec.clone(), entries)?,
        refinement_change: change,
        radial_nodes: nodes.len(),
        angular_nodes: f.modes().is_none().then(|| scheme.angular_count(d)),
        sampled_sup: sup,
    })
}

fn entries(f: &SymbolFn, d: usize, scheme: &QuadratureScheme) -> (DMatrix<C64>, f64) {
    let (nodes, weights) = scheme.radial_rule(d);
    // g[(m, j)] = r_j^m e^{−r_j²/4} / ‖z^m‖, so the radial weight of (l, m)
    // at node j is w_j g[(l, j)] g[(m, j)].
    let lnn: Vec<f64> = (0..d).map(ln_monomial_norm).collect();
    let g = DMatrix::from_fn(d, nodes.len(), |m, j| {
        let r = nodes[j];
        (m as f64 * r.ln() - r * r / 4.0 - lnn[m]).exp()
    });
    match f.modes() {
        Some(modes) => {
            let mut out = DMatrix::zeros(d, d);
            let mut sup = 0.0f64;
            for &r in &nodes {
                let v: f64 = modes.iter().map(|m| (m.radial)(r).norm()).sum();
                sup = sup.max(v);
            }
            for mode in modes {
                let k = mode.k;
                let radial: Vec<C64> = nodes.iter().map(|&r| (mode.radial)(r)).collect();
                for m in 0..d {
                    let l = m as i64 + k;
                    if l < 0 || l >= d as i64 {
                        continue;
                    }
                    let l = l as usize;
                    let s: C64 = (0..nodes.len()).map(|j| radial[j] * (weights[j] * g[(l, j)] * g[(m, j)])).sum();
                    out[(l, m)] += s;
                }
            }
            (out, sup)
        }
        None => generic_entries(f, d, &nodes, &weights, &g, scheme.angular_count(d)),
    }
}

fn generic_entries(
    f: &SymbolFn,
    d: usize,
    nodes: &[f64],
    weights: &[f64],
    g: &DMatrix<f64>,
    n_theta: usize,
) -> (DMatrix<C64>, f64) {
    let fft = FftPlanner::new().plan_fft_forward(n_theta);
    // coefficient table: hat[j][k + d − 1] = f̂_k(r_j), |k| < d
    let rows: Vec<(Vec<C64>, f64)> = nodes
        .par_iter()
        .map(|&r| {
            let mut buf: Vec<C64> =
                (0..n_theta).map(|t| f.eval(C64::from_polar(r, 2.0 * PI * t as f64 / n_theta as f64))).collect();
            let sup = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
            fft.process(&mut buf);
            let scale = 1.0 / n_theta as f64;
            let hat = (0..2 * d - 1)
                .map(|i| {
                    let k = i as i64 - (d as i64 - 1);
                    buf[k.rem_euclid(n_theta as i64) as usize] * scale
                })
                .collect();
            (hat, sup)
        })
        .collect();
    let sup = rows.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    let cols: Vec<Vec<C64>> = (0..d)
        .into_par_iter()
        .map(|m| {
            (0..d)
                .map(|l| {
                    let idx = l + d - 1 - m;
                    (0..nodes.len()).map(|j| rows[j].0[idx] * (weights[j] * g[(l, j)] * g[(m, j)])).sum()
                })
                .collect()
        })
        .collect();
    (DMatrix::from_fn(d, d, |l, m| cols[m][l]), sup)
}

/// `α_m = Γ(m + 3/2) / √(m! (m+1)!)`, the weights of `T_{z/|z|} e_m = α_m e_{m+1}`.
pub fn shift_weight(m: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let ln = ln_gamma(m as f64 + 1.5) - 0.5 * (crate::special::ln_factorial(m) + crate::special::ln_factorial(m + 1));
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize) -> FockSpec {
        FockSpec::single(d).unwrap()
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let t = toeplitz(&SymbolFn::constant(C64::new(1.0, 0.0)), &spec(48), &QuadratureScheme::default()).unwrap();
        let err = (t.entries - DMatrix::<C64>::identity(48, 48)).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn generic_and_separable_routes_agree() {
        let sep = SymbolFn::odd_gaussian();
        let gen = SymbolFn::generic("odd", |z: C64| C64::new(z.re * (-z.norm_sqr() / 2.0).exp(), 0.0));
        let s = spec(24);
        let a = toeplitz(&sep, &s, &QuadratureScheme::default()).unwrap();
        let b = toeplitz(&gen, &s, &QuadratureScheme::default()).unwrap();
        assert!((a.entries - b.entries).norm() < 1e-11);
    }

    #[test]
    fn winding_band_matches_shift_weights() {
        let t = toeplitz(&SymbolFn::winding(1), &spec(40), &QuadratureScheme::default()).unwrap();
        for m in 0..39 {
            assert!((t.entries[(m + 1, m)].re - shift_weight(m)).abs() < 1e-12);
        }
        assert!((shift_weight(0) - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn multi_mode_product_spec_rejected() {
        let s = FockSpec::product(&[4, 4]).unwrap();
        assert!(toeplitz(&SymbolFn::winding(1), &s, &QuadratureScheme::default()).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // a symbol with angular content far beyond the sampling rate
        let f = SymbolFn::generic("rough", |z: C64| C64::from_polar(1.0, 37.0 * z.arg()));
        let scheme = QuadratureScheme { angular_nodes: Some(34), ..Default::default() };
        assert!(matches!(toeplitz(&f, &spec(8), &scheme), Err(QhaError::QuadratureNonConvergence { .. })));
    }
}
