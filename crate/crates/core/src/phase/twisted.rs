use rayon::prelude::*;

use super::grid::{ConventionParams, Grid, GridSymbol};
use crate::error::{QhaError, Result};
use crate::C64;

/// Largest accepted disagreement between the two implementations.
pub const TWISTED_AGREEMENT_TOL: f64 = 1e-10;

/// `(f ∗_σ g)(ξ) = c_t h² Σ_w f(ξ − w) g(w) e^{i t σ(ξ, w)}`, fast path.
///
/// `f` is taken as zero wherever `ξ − w` leaves the grid. Both symbols
/// must decay at the boundary.
pub fn twisted_convolution(f: &GridSymbol, g: &GridSymbol, conv: &ConventionParams) -> Result<GridSymbol> {
    check_inputs(f, g)?;
    Ok(twisted_fast(f, g, conv))
}

/// Both implementations, failing if they disagree beyond [`TWISTED_AGREEMENT_TOL`].
pub fn twisted_convolution_checked(
    f: &GridSymbol,
    g: &GridSymbol,
    conv: &ConventionParams,
) -> Result<(GridSymbol, f64)> {
    check_inputs(f, g)?;
    let fast = twisted_fast(f, g, conv);
    let reference = twisted_reference(f, g, conv);
    let scale = reference.max_abs().max(f64::MIN_POSITIVE);
    let gap = fast.max_diff(&reference)? / scale;
    if gap > TWISTED_AGREEMENT_TOL {
        return Err(QhaError::GridMismatch(format!("twisted convolution paths disagree by {gap:.3e}")));
    }
    Ok((fast, gap))
}

fn check_inputs(f: &GridSymbol, g: &GridSymbol) -> Result<()> {
    f.ensure_grid(g)?;
    let ratio = f.boundary_ratio().max(g.boundary_ratio());
    if ratio > super::transforms::SYNTHESIS_DECAY_TOL {
        return Err(QhaError::BoundaryDecay(ratio));
    }
    Ok(())
}

/// Straight quadruple loop evaluating the phase at every term.
pub fn twisted_reference(f: &GridSymbol, g: &GridSymbol, conv: &ConventionParams) -> GridSymbol {
    let grid = f.grid;
    let n = grid.points;
    let t = conv.twisted_phase_scale;
    let scale = conv.twisted_prefactor * grid.cell();
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (a1, a2) = (k / n, k % n);
            let xi = grid.point(a1, a2);
            let mut acc = C64::new(0.0, 0.0);
            for b1 in 0..n {
                for b2 in 0..n {
                    let Some(fv) = shifted(f, a1, a2, b1, b2) else { continue };
                    let w = grid.point(b1, b2);
                    let sigma = xi.im * w.re - xi.re * w.im;
                    acc += fv * g.get(b1, b2) * C64::from_polar(1.0, t * sigma);
                }
            }
            acc * scale
        })
        .collect();
    GridSymbol { grid, samples, provenance: format!("{} *_sigma {}", f.provenance, g.provenance) }
}

/// `f(ξ − w)` at grid indices, or `None` outside the box.
fn shifted(f: &GridSymbol, a1: usize, a2: usize, b1: usize, b2: usize) -> Option<C64> {
    let half = f.grid.points / 2;
    let i = (a1 + half).checked_sub(b1)?;
    let j = (a2 + half).checked_sub(b2)?;
    (i < f.grid.points && j < f.grid.points).then(|| f.get(i, j))
}

/// The phase `e^{it(y_ξ x_w − x_ξ y_w)}` splits into per-axis tables, and
/// the loop over `w` only visits indices for which `ξ − w` stays on the grid.
fn twisted_fast(f: &GridSymbol, g: &GridSymbol, conv: &ConventionParams) -> GridSymbol {
    let grid: Grid = f.grid;
    let n = grid.points;
    let half = n / 2;
    let x = grid.coords();
    let t = conv.twisted_phase_scale;
    // p_plus[a][b] = e^{i t x_a x_b}
    let p_plus: Vec<C64> = (0..n * n).map(|k| C64::from_polar(1.0, t * x[k / n] * x[k % n])).collect();
    let scale = conv.twisted_prefactor * grid.cell();
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (a1, a2) = (k / n, k % n);
            let lo1 = (a1 + half).saturating_sub(n - 1);
            let hi1 = (a1 + half).min(n - 1);
            let lo2 = (a2 + half).saturating_sub(n - 1);
            let hi2 = (a2 + half).min(n - 1);
            let mut acc = C64::new(0.0, 0.0);
            for b1 in lo1..=hi1 {
                let row = a1 + half - b1;
                // e^{i t y_ξ x_w}
                let ph1 = p_plus[a2 * n + b1];
                let mut inner = C64::new(0.0, 0.0);
                for b2 in lo2..=hi2 {
                    // e^{−i t x_ξ y_w}
                    let ph2 = p_plus[a1 * n + b2].conj();
                    inner += f.get(row, a2 + half - b2) * g.get(b1, b2) * ph2;
                }
                acc += inner * ph1;
            }
            acc * scale
        })
        .collect();
    GridSymbol { grid, samples, provenance: format!("{} *_sigma {}", f.provenance, g.provenance) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(grid: Grid, c: C64, w: f64, phase: f64) -> GridSymbol {
        GridSymbol::sample(grid, move |z| C64::from_polar((-(z - c).norm_sqr() / w).exp(), phase * z.re), "bump")
    }

    #[test]
    fn fast_path_matches_reference() {
        let g = Grid::new(8.0, 32).unwrap();
        let f = bump(g, C64::new(0.5, -0.3), 1.5, 0.4);
        let h = bump(g, C64::new(-0.2, 0.6), 2.0, -0.7);
        for conv in [ConventionParams::audited(), ConventionParams::full_phase()] {
            let (_, gap) = twisted_convolution_checked(&f, &h, &conv).unwrap();
            assert!(gap < 1e-12);
        }
    }

    #[test]
    fn vacuum_pair_reproduces_itself_under_half_phase() {
        // with half phase and (2π)⁻¹: e^{−|ξ|²/4} ∗ e^{−|ξ|²/4} = e^{−|ξ|²/4}
        let g = Grid::new(10.0, 64).unwrap();
        let v = GridSymbol::sample(g, |z| C64::new((-z.norm_sqr() / 4.0).exp(), 0.0), "vac");
        let out = twisted_convolution(&v, &v, &ConventionParams::audited()).unwrap();
        assert!(out.max_diff(&v).unwrap() < 1e-6);
    }

    #[test]
    fn rejects_undecayed_input() {
        let g = Grid::new(4.0, 16).unwrap();
        let one = GridSymbol::sample(g, |_| C64::new(1.0, 0.0), "one");
        assert!(matches!(
            twisted_convolution(&one, &one, &ConventionParams::audited()),
            Err(QhaError::BoundaryDecay(_))
        ));
    }
}
