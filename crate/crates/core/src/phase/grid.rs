use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::C64;

/// Square sampling grid `[−L, L)²` with `N` points per axis.
///
/// Node `(i, j)` sits at `ξ = x_i + i·y_j` with `x_i = (i − N/2)h`,
/// `h = 2L/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub extent: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
        if !(extent > 0.0) || points < 4 || !points.is_multiple_of(2) {
            return Err(QhaError::GridMismatch(format!(
                "grid needs L > 0 and an even N ≥ 4 (got L = {extent}, N = {points})"
            )));
        }
        Ok(Self { extent, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.coord(i), self.coord(j))
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// Cell area `h²`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(2)
    }

    /// Grid on which the FFT route of the symplectic Fourier transform
    /// with phase scale `s` lands: spacing `2π/(|s| N h)`.
    pub fn dual(&self, phase_scale: f64) -> Result<Self> {
        let h = 2.0 * PI / (phase_scale.abs() * self.points as f64 * self.spacing());
        Self::new(h * self.points as f64 / 2.0, self.points)
    }

    /// Index of `−x_i` (index 0 maps to itself).
    pub fn mirror(&self, i: usize) -> usize {
        (self.points - i) % self.points
    }
}

/// Samples of a phase-space function on a [`Grid`], row-major in `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSymbol {
    pub grid: Grid,
    pub samples: Vec<C64>,
    pub provenance: String,
}

impl GridSymbol {
    pub fn new(grid: Grid, samples: Vec<C64>, provenance: impl Into<String>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(QhaError::GridMismatch(format!("{} samples for a {0}x{0} grid", grid.points)));
        }
        Ok(Self { grid, samples, provenance: provenance.into() })
    }

    pub fn sample(grid: Grid, f: impl Fn(C64) -> C64 + Sync, provenance: impl Into<String>) -> Self {
        use rayon::prelude::*;
        let n = grid.points;
        let samples = (0..grid.len()).into_par_iter().map(|k| f(grid.point(k / n, k % n))).collect();
        Self { grid, samples, provenance: provenance.into() }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.samples[i * self.grid.points + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.grid.points;
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for k in 0..n {
            for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                edge = edge.max(self.get(i, j).norm());
            }
        }
        edge / peak
    }

    /// `Σ f(ξ) h²`.
    pub fn integral(&self) -> C64 {
        self.samples.iter().sum::<C64>() * self.grid.cell()
    }

    /// `β₋ f(ξ) = f(−ξ)` on the grid.
    pub fn reflect(&self) -> Self {
        let n = self.grid.points;
        let g = self.grid;
        let samples = (0..g.len()).map(|k| self.get(g.mirror(k / n), g.mirror(k % n))).collect();
        Self { grid: g, samples, provenance: format!("reflect({})", self.provenance) }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &GridSymbol) -> Result<Self> {
        self.ensure_grid(other)?;
        Ok(Self {
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
            provenance: format!("{} + {}", self.provenance, other.provenance),
        })
    }

    pub fn max_diff(&self, other: &GridSymbol) -> Result<f64> {
        self.ensure_grid(other)?;
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `‖f − g‖₂ / ‖g‖₂` over the grid samples.
    pub fn relative_l2_diff(&self, reference: &GridSymbol) -> Result<f64> {
        self.ensure_grid(reference)?;
        let num: f64 = self.samples.iter().zip(&reference.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = reference.samples.iter().map(|b| b.norm_sqr()).sum();
        Ok((num / den).sqrt())
    }

    pub(crate) fn ensure_grid(&self, other: &GridSymbol) -> Result<()> {
        if self.grid != other.grid {
            return Err(QhaError::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Text file: `# qha-grid v1`, `extent L`, `points N`, `convention tag`,
    /// then `N` lines of `2N` numbers (`re im` pairs, row-major).
    pub fn write_text<W: Write>(&self, out: &mut W, convention: &str) -> Result<()> {
        writeln!(out, "# qha-grid v1")?;
        writeln!(out, "extent {:e}", self.grid.extent)?;
        writeln!(out, "points {}", self.grid.points)?;
        writeln!(out, "convention {convention}")?;
        for row in self.samples.chunks(self.grid.points) {
            let cells: Vec<String> = row.iter().map(|c| format!("{:e} {:e}", c.re, c.im)).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<(Self, String)> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| QhaError::Parse("unexpected end of grid file".into()))?.map_err(Into::into)
        };
        if next()?.trim() != "# qha-grid v1" {
            return Err(QhaError::Parse("missing qha-grid header".into()));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| QhaError::Parse(format!("expected `{key}` line")))
        };
        let extent: f64 = field(next()?, "extent")?.parse().map_err(|e| QhaError::Parse(format!("extent: {e}")))?;
        let points: usize = field(next()?, "points")?.parse().map_err(|e| QhaError::Parse(format!("points: {e}")))?;
        let convention = field(next()?, "convention")?;
        let grid = Grid::new(extent, points)?;
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..points {
            let vals: Vec<f64> = next()?
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| QhaError::Parse(format!("row {i}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 2 * points {
                return Err(QhaError::Parse(format!("row {i} has {} numbers", vals.len())));
            }
            samples.extend(vals.chunks(2).map(|p| C64::new(p[0], p[1])));
        }
        Ok((Self::new(grid, samples, "file")?, convention))
    }
}

/// Normalization constants of the Fourier stack.
///
/// * `F_σ f(z) = c_σ ∫ f(w) e^{i s σ(w, z)} dw`
/// * `(f ∗_σ g)(ξ) = c_t ∫ f(ξ − w) g(w) e^{i t σ(ξ, w)} dw`
/// * `F_W⁻¹ f = c_H ∫ f(ξ) W_ξ dξ`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConventionParams {
    pub tag: String,
    pub fourier_phase_scale: f64,
    pub fourier_prefactor: f64,
    pub twisted_phase_scale: f64,
    pub twisted_prefactor: f64,
    pub haar_normalization: f64,
}

impl ConventionParams {
    /// Half-phase convention in which `F_op(A) = A·U`, `F_op² = id` and
    /// `F_W(BA) = F_W(B) ∗_σ F_W(A)`.
    pub fn audited() -> Self {
        Self {
            tag: "half-phase".into(),
            fourier_phase_scale: -0.5,
            fourier_prefactor: 1.0 / (4.0 * PI),
            twisted_phase_scale: -0.5,
            twisted_prefactor: 1.0 / (2.0 * PI),
            haar_normalization: 1.0 / (2.0 * PI),
        }
    }

    /// Full phase `e^{iσ(w,z)}` with prefactor `(2π)⁻¹` and an unnormalized
    /// full-phase twisted convolution.
    pub fn full_phase() -> Self {
        Self {
            tag: "full-phase".into(),
            fourier_phase_scale: 1.0,
            fourier_prefactor: 1.0 / (2.0 * PI),
            twisted_phase_scale: 1.0,
            twisted_prefactor: 1.0,
            haar_normalization: 1.0 / (2.0 * PI),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "half-phase" | "audited" => Ok(Self::audited()),
            "full-phase" => Ok(Self::full_phase()),
            _ => Err(QhaError::Parse(format!("unknown convention `{name}` (expected half-phase or full-phase)"))),
        }
    }

    /// `|s|/(2π)`, the prefactor making `F_σ` an involution for phase scale `s`.
    pub fn involutive_prefactor(phase_scale: f64) -> f64 {
        phase_scale.abs() / (2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(10.0, 256).unwrap();
        assert!((g.spacing() - 20.0 / 256.0).abs() < 1e-15);
        assert_eq!(g.coord(128), 0.0);
        assert_eq!(g.coord(0), -10.0);
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(1), 255);
        assert_eq!(g.coord(g.mirror(37)), -g.coord(37));
        assert!(Grid::new(10.0, 7).is_err());
    }

    #[test]
    fn reflection_is_involutive() {
        let g = Grid::new(4.0, 16).unwrap();
        let f = GridSymbol::sample(g, |z| C64::new(z.re, z.im * z.im), "test");
        assert_eq!(f.reflect().reflect().samples, f.samples);
        let r = f.reflect();
        assert_eq!(r.get(3, 5), f.get(13, 11));
    }

    #[test]
    fn text_round_trip() {
        let g = Grid::new(3.0, 8).unwrap();
        let f = GridSymbol::sample(g, |z| (-z.norm_sqr()).exp() * C64::new(1.0, 0.5), "t");
        let mut buf = Vec::new();
        f.write_text(&mut buf, "half-phase").unwrap();
        let (back, tag) = GridSymbol::read_text(buf.as_slice()).unwrap();
        assert_eq!(tag, "half-phase");
        assert_eq!(back.samples, f.samples);
        assert_eq!(back.grid, f.grid);
    }

    #[test]
    fn gaussian_integral_and_boundary() {
        let g = Grid::new(10.0, 128).unwrap();
        let f = GridSymbol::sample(g, |z| C64::new((-z.norm_sqr() / 2.0).exp(), 0.0), "gauss");
        assert!((f.integral().re - 2.0 * PI).abs() < 1e-10);
        assert!(f.boundary_ratio() < 1e-20);
    }
}
