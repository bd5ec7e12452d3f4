//! The running-wave quasiparticle series: plane-wave condensate frequency,
//! the two-mode amplitude system, the closed-form dispersion and the Landau
//! critical velocity.
//!
//! Two independent routes to the same dispersion are kept deliberately:
//! `solve_two_mode` builds and diagonalizes the 2×2 amplitude system, while
//! `spectrum_beta` evaluates the closed form
//!
//! ```text
//! β_λ = -ħ²(p·λ)/m + sqrt((ħ²λ²/2m + v_λ)² - v_λ²).
//! ```
//!
//! The drift term carries the `ħ²/m` factors required by dimensional
//! consistency.

use nalgebra as na;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dot, norm, norm_sq, wavevector, LatticeVector, PhysicalParams};
use crate::potential::{FourierTable, PotentialError};

#[derive(Debug, Error, PartialEq)]
pub enum BogoliubovError {
    #[error("two-mode system is singular at lambda = {lambda} (gapless branch point)")]
    Gapless { lambda: LatticeVector },
    #[error("selected branch not normalizable at lambda = {lambda}: |sigma|^2 - |rho|^2 = {value}")]
    NonNormalizable { lambda: LatticeVector, value: f64 },
    #[error("dispersion radicand negative at lambda = {lambda}: {radicand}")]
    ComplexBranch { lambda: LatticeVector, radicand: f64 },
    #[error("lattice scan is empty (cutoff {cutoff})")]
    EmptyScan { cutoff: i32 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A solved excitation mode on top of the plane-wave condensate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BogoliubovMode {
    pub p: LatticeVector,
    pub lambda: LatticeVector,
    pub rho: f64,
    pub sigma: f64,
    pub beta: f64,
}

/// Condensate frequency `Ω = ħ²p²/2m + V0`.
pub fn condensate_omega(p: LatticeVector, table: &FourierTable) -> f64 {
    let k = wavevector(p, &table.params);
    table.params.kinetic(k) + table.v0_limit
}

/// Flow (drift) term `ħ²(p·λ)/m` entering the spectrum with a minus sign.
pub fn drift_term(p: LatticeVector, lambda: LatticeVector, params: &PhysicalParams) -> f64 {
    let pk = wavevector(p, params);
    let lk = wavevector(lambda, params);
    params.hbar * params.hbar * dot(pk, lk) / params.mass
}

/// Gap part `ε(λ) = sqrt((ħ²λ²/2m + v_λ)² - v_λ²)` of the dispersion.
pub fn quasiparticle_energy(
    lambda: LatticeVector,
    table: &FourierTable,
) -> Result<f64, BogoliubovError> {
    let t = table.params.kinetic(wavevector(lambda, &table.params));
    let v = table.v(lambda);
    let radicand = (t + v) * (t + v) - v * v;
    if radicand < 0.0 {
        return Err(BogoliubovError::ComplexBranch { lambda, radicand });
    }
    Ok(radicand.sqrt())
}

/// Closed-form flow-shifted dispersion `β_λ = ε(λ) - ħ²(p·λ)/m`.
pub fn spectrum_beta(
    p: LatticeVector,
    lambda: LatticeVector,
    table: &FourierTable,
) -> Result<f64, BogoliubovError> {
    Ok(quasiparticle_energy(lambda, table)? - drift_term(p, lambda, &table.params))
}

/// Solves the two-mode amplitude system for `(ρ_λ, σ_λ, β_λ)` numerically
/// and normalizes to `|σ|² - |ρ|² = 1`.
///
/// The system couples the amplitude pair through the matrix
/// `[[-(T₊ + v), -v], [v, T₋ + v]]` built from the kinetic differences
/// `T± = ħ²((p±λ)² - p²)/2m`; its eigenvalue with the larger real part is
/// the physical branch.
pub fn solve_two_mode(
    p: LatticeVector,
    lambda: LatticeVector,
    table: &FourierTable,
) -> Result<BogoliubovMode, BogoliubovError> {
    let params = &table.params;
    let v = table.v(lambda);
    let kp = wavevector(p, params);
    let kl = wavevector(lambda, params);
    let t_plus = params.kinetic(add3(kp, kl)) - params.kinetic(kp) + v;
    let t_minus = params.kinetic(sub3(kp, kl)) - params.kinetic(kp) + v;

    let m = na::Matrix2::new(-t_plus, -v, v, t_minus);
    let eigs = m.complex_eigenvalues();
    // physical branch: larger real part
    let (b0, b1) = (eigs[0], eigs[1]);
    let beta_c = if b0.re >= b1.re { b0 } else { b1 };
    let scale = m.abs().max().max(1.0);
    if beta_c.im.abs() > 1e-10 * scale {
        return Err(BogoliubovError::ComplexBranch { lambda, radicand: -beta_c.im.abs() });
    }
    let beta = beta_c.re;
    if (b0 - b1).norm() <= 1e-12 * scale {
        return Err(BogoliubovError::Gapless { lambda });
    }

    // eigenvector from the first row: (β + T₊)ρ = -v σ
    let (rho_raw, sigma_raw) = if v != 0.0 {
        (-v, beta + t_plus)
    } else {
        (0.0, 1.0)
    };
    let norm2 = sigma_raw * sigma_raw - rho_raw * rho_raw;
    if norm2 <= 0.0 {
        return Err(BogoliubovError::NonNormalizable { lambda, value: norm2 });
    }
    let s = norm2.sqrt().recip();
    Ok(BogoliubovMode { p, lambda, rho: rho_raw * s, sigma: sigma_raw * s, beta })
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Landau critical velocity over the discrete lattice plus the continuum
/// sound-speed bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauReport {
    /// `min_λ ε(λ)/(ħ|λ|)` over nonzero lattice vectors within the cutoff.
    pub v_landau: f64,
    /// Lattice vector attaining the minimum.
    pub argmin: LatticeVector,
    /// Continuum lower bound `sqrt(V0/m)` (the λ → 0 sound speed).
    pub continuum_bound: f64,
}

/// Minimizes `ε(λ)/(ħ|λ|)` over the nonzero lattice within `cutoff`.
pub fn landau_velocity(table: &FourierTable, cutoff: i32) -> Result<LandauReport, BogoliubovError> {
    table.require_repulsive()?;
    if cutoff < 1 {
        return Err(BogoliubovError::EmptyScan { cutoff });
    }
    let params = &table.params;
    let mut best: Option<(f64, LatticeVector)> = None;
    for lambda in crate::geometry::lattice_box(cutoff, cutoff) {
        if lambda.is_zero() {
            continue;
        }
        let eps = quasiparticle_energy(lambda, table)?;
        let k = norm(wavevector(lambda, params));
        let v = eps / (params.hbar * k);
        match best {
            Some((vb, _)) if vb <= v => {}
            _ => best = Some((v, lambda)),
        }
    }
    let (v_landau, argmin) = best.expect("cutoff >= 1 always yields nonzero vectors");
    Ok(LandauReport {
        v_landau,
        argmin,
        continuum_bound: (table.v0_limit / params.mass).sqrt(),
    })
}

/// One row of an exported dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub n: LatticeVector,
    pub k_abs: f64,
    pub lambda: f64,
    pub selected: bool,
    pub complex: bool,
}

/// `(lattice vector, energy)` samples for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionCurve {
    pub points: Vec<DispersionPoint>,
}

pub fn kinetic_of(lambda: LatticeVector, params: &PhysicalParams) -> f64 {
    params.kinetic(wavevector(lambda, params))
}

pub fn wavevector_norm(lambda: LatticeVector, params: &PhysicalParams) -> f64 {
    norm_sq(wavevector(lambda, params)).sqrt()
}
