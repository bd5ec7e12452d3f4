//! Run configuration: one JSON document per run, plus the variant flags
//! and config hash embedded in every report.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::PhysicalParams;
use crate::oracle::DensityConvention;
use crate::pairseries::KineticNorm;
use crate::potential::{PotentialShape, PotentialSpec, TableMode};
use crate::variational::MatrixVariant;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConfig {
    pub hbar: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub n_particles: u64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, l1: 10.0, l2: 1.0, n_particles: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialConfig {
    pub shape: PotentialShape,
    pub amplitude: f64,
    pub radius: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { shape: PotentialShape::Tophat, amplitude: 1.0, radius: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub quadrature: f64,
    pub eigen: f64,
    pub resonance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: 1e-8, eigen: 1e-9, resonance: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub n_particles: u32,
    /// Axes carrying a `±` unit-mode pair next to the zero mode; 2 gives
    /// the five-mode cross `{0, ±e1, ±e2}`.
    pub mode_pairs: i32,
    /// Coupling fixed as `ρ v / T_min`.
    pub coupling_ratio: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_particles: 8, mode_pairs: 2, coupling_ratio: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub physical: PhysicalConfig,
    pub potential: PotentialConfig,
    pub lattice_cutoff: i32,
    pub tolerances: Tolerances,
    pub mode: TableMode,
    pub variant: MatrixVariant,
    pub kinetic_norm: KineticNorm,
    pub density_convention: DensityConvention,
    pub oracle: OracleConfig,
    /// Velocity bound for resonance scans.
    pub v_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physical: PhysicalConfig::default(),
            potential: PotentialConfig::default(),
            lattice_cutoff: 8,
            tolerances: Tolerances::default(),
            mode: TableMode::Limit,
            variant: MatrixVariant::default(),
            kinetic_norm: KineticNorm::default(),
            density_convention: DensityConvention::default(),
            oracle: OracleConfig::default(),
            v_max: 10.0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.potential_spec().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.lattice_cutoff < 1 {
            return Err(ConfigError::Invalid(format!(
                "lattice_cutoff must be >= 1, got {}",
                self.lattice_cutoff
            )));
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.eigen > 0.0 && t.resonance >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "tolerances must be positive (resonance may be 0 for exact mode): {t:?}"
            )));
        }
        if !(self.v_max > 0.0) {
            return Err(ConfigError::Invalid(format!("v_max must be > 0, got {}", self.v_max)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams, crate::geometry::GeometryError> {
        PhysicalParams::new(
            self.physical.hbar,
            self.physical.mass,
            self.physical.l1,
            self.physical.l2,
            self.physical.n_particles,
        )
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec, crate::potential::PotentialError> {
        PotentialSpec::new(self.potential.shape, self.potential.amplitude, self.potential.radius)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn variant_flags(&self) -> VariantFlags {
        VariantFlags {
            matrix_variant: self.variant,
            kinetic_norm: self.kinetic_norm,
            density_convention: self.density_convention,
        }
    }
}

/// The formula-variant switches in effect for a run; embedded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariantFlags {
    pub matrix_variant: MatrixVariant,
    pub kinetic_norm: KineticNorm,
    pub density_convention: DensityConvention,
}
