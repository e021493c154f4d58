//! Experiment configuration. Every section is optional; omitted fields take
//! the defaults below, unknown fields are rejected.

use std::path::Path;

use qha_core::fredholm::IndexOptions;
use qha_core::phase::experiments::{AuditOptions, DeltaOptions, FopOptions, IdealOptions};
use qha_core::phase::{ConventionParams, Grid};
use qha_core::quantize::QuadratureScheme;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Seed of every random family; `--seed` overrides it.
    pub seed: u64,
    pub convention: ConventionConfig,
    pub quadrature: QuadratureScheme,
    pub ccr: CcrConfig,
    pub parity_check: ParityCheckConfig,
    pub toeplitz_shift: ToeplitzShiftConfig,
    pub even_odd: EvenOddConfig,
    pub index: IndexConfig,
    pub index_parity: IndexParityConfig,
    pub congruence: CongruenceConfig,
    pub modulation: ModulationConfig,
    pub localization: LocalizationConfig,
    pub intersection: IntersectionConfig,
    pub phase: PhaseConfig,
    pub fop: FopConfig,
    pub twisted: TwistedConfig,
    pub delta: DeltaConfig,
    pub parity_conjugation: ParityConjugationConfig,
    pub ideal: IdealConfig,
    pub audit: AuditConfig,
    pub suite: SuiteConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20_240_611,
            convention: ConventionConfig::default(),
            quadrature: QuadratureScheme::default(),
            ccr: CcrConfig::default(),
            parity_check: ParityCheckConfig::default(),
            toeplitz_shift: ToeplitzShiftConfig::default(),
            even_odd: EvenOddConfig::default(),
            index: IndexConfig::default(),
            index_parity: IndexParityConfig::default(),
            congruence: CongruenceConfig::default(),
            modulation: ModulationConfig::default(),
            localization: LocalizationConfig::default(),
            intersection: IntersectionConfig::default(),
            phase: PhaseConfig::default(),
            fop: FopConfig::default(),
            twisted: TwistedConfig::default(),
            delta: DeltaConfig::default(),
            parity_conjugation: ParityConjugationConfig::default(),
            ideal: IdealConfig::default(),
            audit: AuditConfig::default(),
            suite: SuiteConfig::default(),
        }
    }
}

/// A named convention with optional per-constant overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConventionConfig {
    /// `half-phase` (default) or `full-phase`.
    pub name: Option<String>,
    pub fourier_phase_scale: Option<f64>,
    pub fourier_prefactor: Option<f64>,
    pub twisted_phase_scale: Option<f64>,
    pub twisted_prefactor: Option<f64>,
    pub haar_normalization: Option<f64>,
}

impl ConventionConfig {
    pub fn resolve(&self) -> CliResult<ConventionParams> {
        let name = self.name.as_deref().unwrap_or("half-phase");
        let mut p = ConventionParams::by_name(name).map_err(|e| CliError::config("convention.name", e.to_string()))?;
        let mut overridden = false;
        for (slot, value) in [
            (&mut p.fourier_phase_scale, self.fourier_phase_scale),
            (&mut p.fourier_prefactor, self.fourier_prefactor),
            (&mut p.twisted_phase_scale, self.twisted_phase_scale),
            (&mut p.twisted_prefactor, self.twisted_prefactor),
            (&mut p.haar_normalization, self.haar_normalization),
        ] {
            if let Some(v) = value {
                *slot = v;
                overridden = true;
            }
        }
        if overridden {
            p.tag = format!("{}+overrides", p.tag);
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcrConfig {
    pub dims: Vec<usize>,
    pub block: usize,
    pub pairs: usize,
    pub radius: f64,
    pub tol: f64,
    /// Defects below this count as converged in the monotonicity check.
    pub noise_floor: f64,
    pub time_budget_s: f64,
}

impl Default for CcrConfig {
    fn default() -> Self {
        Self {
            dims: vec![64, 128],
            block: 32,
            pairs: 50,
            radius: 1.5,
            tol: 1e-8,
            noise_floor: 1e-13,
            time_budget_s: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParityCheckConfig {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub radius: f64,
    pub tol: f64,
    pub time_budget_s: f64,
}

impl Default for ParityCheckConfig {
    fn default() -> Self {
        Self { dims: vec![64, 128], samples: 20, radius: 1.5, tol: 1e-12, time_budget_s: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToeplitzShiftConfig {
    pub dim: usize,
    pub max_m: usize,
    pub tol: f64,
    pub alpha0_tol: f64,
    pub off_shift_tol: f64,
    pub limit_tol: f64,
}

impl Default for ToeplitzShiftConfig {
    fn default() -> Self {
        Self { dim: 64, max_m: 40, tol: 1e-8, alpha0_tol: 1e-10, off_shift_tol: 1e-10, limit_tol: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvenOddConfig {
    pub dim: usize,
    pub samples: usize,
    pub tol: f64,
    pub reconstruction_tol: f64,
}

impl Default for EvenOddConfig {
    fn default() -> Self {
        Self { dim: 64, samples: 5, tol: 1e-12, reconstruction_tol: 1e-13 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexConfig {
    pub dims: Vec<usize>,
    pub member: String,
    pub expected: Option<i64>,
    pub options: IndexOptions,
    pub time_budget_s: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            dims: vec![200, 400],
            member: "tzp".into(),
            expected: Some(-1),
            options: IndexOptions::default(),
            time_budget_s: 60.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexParityConfig {
    pub dim: usize,
    pub members: Vec<String>,
    pub options: IndexOptions,
}

impl Default for IndexParityConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            members: ["even:-2", "even:0", "even:2", "winding:1", "winding:2", "winding:3"].map(String::from).to_vec(),
            options: IndexOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceFamily {
    pub order: usize,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CongruenceConfig {
    pub dim: usize,
    pub families: Vec<CongruenceFamily>,
    pub options: IndexOptions,
}

impl Default for CongruenceConfig {
    fn default() -> Self {
        let shifts = ["identity", "winding:1", "winding:2", "winding:3", "winding:-1", "winding:-2"];
        let with_even: Vec<String> = shifts.iter().copied().chain(["even:2", "even:-2"]).map(String::from).collect();
        let plain: Vec<String> = shifts.iter().copied().map(String::from).collect();
        Self {
            dim: 200,
            families: vec![
                CongruenceFamily { order: 2, members: with_even },
                CongruenceFamily { order: 3, members: plain.clone() },
                CongruenceFamily { order: 4, members: plain },
            ],
            options: IndexOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationConfig {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub directions: usize,
    pub modulation_tol: f64,
    /// Radius at which the shift modulus of `U` is read off.
    pub shift_radius: f64,
    pub shift_min: f64,
    pub contrast_min: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self {
            dim: 96,
            radii: vec![0.0, 0.125, 0.25, 0.5, 0.75, 1.0],
            directions: 8,
            modulation_tol: 1e-8,
            shift_radius: 1.0,
            shift_min: 0.5,
            contrast_min: 1e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationConfig {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub directions: usize,
    pub tol: f64,
    /// Profiles must decrease strictly from this radius on.
    pub monotone_from: f64,
    /// Centre of the coherent-state projector in the family.
    pub coherent_center: [f64; 2],
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            radii: (0..=16).map(|i| 0.25 * i as f64).collect(),
            directions: 8,
            tol: 1e-6,
            monotone_from: 1.0,
            coherent_center: [0.6, -0.3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntersectionConfig {
    pub factor_dim: usize,
    /// Symbol of the Toeplitz factor on the second mode (symbol registry name).
    pub b_symbol: String,
    pub v_radii: Vec<f64>,
    pub v_directions: usize,
    pub w_radii: Vec<f64>,
    pub w_directions: usize,
    pub decay_radius: f64,
    pub decay_ratio: f64,
    pub flat_tol: f64,
    /// Allowed relative spread of the `I ⊗ I` envelope.
    pub control_tol: f64,
}

impl Default for IntersectionConfig {
    fn default() -> Self {
        Self {
            factor_dim: 16,
            b_symbol: "plane-wave:0.4,0.2".into(),
            v_radii: (0..=8).map(|i| 0.5 * i as f64).collect(),
            v_directions: 4,
            w_radii: vec![0.25, 0.5, 0.75, 1.0],
            w_directions: 6,
            decay_radius: 4.0,
            decay_ratio: 1e-3,
            flat_tol: 0.05,
            control_tol: 0.05,
        }
    }
}

/// Shared settings of the Fourier-stack experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
    /// Random operators live on the leading `support × support` block.
    pub support: usize,
    pub max_rank: usize,
    pub family_size: usize,
    pub roundtrip_tol: f64,
    pub time_budget_s: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            dim: 48,
            extent: 10.0,
            points: 128,
            support: 6,
            max_rank: 5,
            family_size: 20,
            roundtrip_tol: 1e-4,
            time_budget_s: 120.0,
        }
    }
}

impl PhaseConfig {
    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.extent, self.points).map_err(|e| CliError::config("phase.points", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FopConfig {
    pub options: FopOptions,
    pub time_budget_s: f64,
}

impl Default for FopConfig {
    fn default() -> Self {
        Self { options: FopOptions::default(), time_budget_s: 300.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwistedConfig {
    pub points: usize,
    pub pairs: usize,
    pub support: usize,
    pub max_rank: usize,
    pub tol: f64,
    pub vacuum_tol: f64,
}

impl Default for TwistedConfig {
    fn default() -> Self {
        Self { points: 64, pairs: 10, support: 4, max_rank: 3, tol: 1e-3, vacuum_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaConfig {
    pub points: usize,
    pub options: DeltaOptions,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self { points: 256, options: DeltaOptions::default() }
    }
}

/// Random smooth symbols: sums of `bumps` Gaussians `e^{−|z−a|²/width}`
/// with centres in the disc of radius `max_center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParityConjugationConfig {
    pub symbols: usize,
    pub bumps: usize,
    pub max_center: f64,
    pub width: f64,
    pub tol: f64,
}

impl Default for ParityConjugationConfig {
    fn default() -> Self {
        Self { symbols: 10, bumps: 3, max_center: 1.5, width: 4.0, tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdealConfig {
    /// Single Gaussian bumps of the self-dual width.
    pub bumps: usize,
    /// Symbols of operators with a zero first row (and as many with a zero first column).
    pub derived: usize,
    pub support: usize,
    pub max_rank: usize,
    pub options: IdealOptions,
}

impl Default for IdealConfig {
    fn default() -> Self {
        Self { bumps: 2, derived: 2, support: 3, max_rank: 2, options: IdealOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// Random interior probes in addition to the vacuum projector.
    pub probes: usize,
    pub options: AuditOptions,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { probes: 2, options: AuditOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub time_budget_s: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { time_budget_s: 600.0 }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("<root>", e.to_string()))?;
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    /// Semantic checks that the types alone cannot express.
    pub fn validate(&self) -> CliResult<()> {
        fn positive(path: &str, v: f64) -> CliResult<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(path, format!("must be positive, got {v}")))
            }
        }
        fn nonzero(path: &str, v: usize) -> CliResult<()> {
            if v > 0 {
                Ok(())
            } else {
                Err(CliError::config(path, "must be at least 1"))
            }
        }
        fn nonempty<T>(path: &str, v: &[T]) -> CliResult<()> {
            if v.is_empty() {
                Err(CliError::config(path, "must not be empty"))
            } else {
                Ok(())
            }
        }
        fn grid_points(path: &str, n: usize) -> CliResult<()> {
            if n >= 4 && n.is_power_of_two() {
                Ok(())
            } else {
                Err(CliError::config(path, format!("must be a power of two ≥ 4, got {n}")))
            }
        }

        self.convention.resolve()?;
        nonempty("ccr.dims", &self.ccr.dims)?;
        for (i, &d) in self.ccr.dims.iter().enumerate() {
            if d < self.ccr.block {
                return Err(CliError::config(&format!("ccr.dims[{i}]"), "must be at least ccr.block"));
            }
        }
        nonzero("ccr.block", self.ccr.block)?;
        positive("ccr.radius", self.ccr.radius)?;
        nonempty("parity_check.dims", &self.parity_check.dims)?;
        if self.toeplitz_shift.dim < self.toeplitz_shift.max_m + 2 {
            return Err(CliError::config("toeplitz_shift.dim", "must exceed toeplitz_shift.max_m + 1"));
        }
        nonempty("index.dims", &self.index.dims)?;
        nonempty("index_parity.members", &self.index_parity.members)?;
        for (i, f) in self.congruence.families.iter().enumerate() {
            if f.order < 2 {
                return Err(CliError::config(&format!("congruence.families[{i}].order"), "must be at least 2"));
            }
            nonempty(&format!("congruence.families[{i}].members"), &f.members)?;
        }
        nonempty("modulation.radii", &self.modulation.radii)?;
        nonzero("modulation.directions", self.modulation.directions)?;
        nonempty("localization.radii", &self.localization.radii)?;
        nonempty("intersection.v_radii", &self.intersection.v_radii)?;
        nonzero("intersection.factor_dim", self.intersection.factor_dim)?;
        grid_points("phase.points", self.phase.points)?;
        positive("phase.extent", self.phase.extent)?;
        nonzero("phase.family_size", self.phase.family_size)?;
        nonzero("phase.max_rank", self.phase.max_rank)?;
        if self.phase.support == 0 || self.phase.support > self.phase.dim {
            return Err(CliError::config("phase.support", "must be between 1 and phase.dim"));
        }
        grid_points("twisted.points", self.twisted.points)?;
        if self.twisted.support == 0 || self.twisted.support > self.phase.dim {
            return Err(CliError::config("twisted.support", "must be between 1 and phase.dim"));
        }
        grid_points("delta.points", self.delta.points)?;
        nonempty("delta.options.widths", &self.delta.options.widths)?;
        positive("parity_conjugation.width", self.parity_conjugation.width)?;
        if self.ideal.support == 0 || self.ideal.support > self.phase.dim {
            return Err(CliError::config("ideal.support", "must be between 1 and phase.dim"));
        }
        positive("suite.time_budget_s", self.suite.time_budget_s)?;
        Ok(())
    }
}
