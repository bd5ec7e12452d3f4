//! The transverse pair-field series: coefficients `φ_{k2,l}`, the pair
//! eigenvalue `Ω`, the extensive leading energy, the particle-number
//! normalization and residuals of the stationarity system.
//!
//! In the `N → ∞` limit every coefficient is a root of the quadratic
//!
//! ```text
//! φ² + b φ + 1/4 = 0,    b = ħ²(l² - k2²)/(2 m V0) - 1,
//! ```
//!
//! equivalently `φ = (X ± sqrt(X² - V0²))/(2 V0)` with
//! `X = ħ²(k2² - l²)/2m + V0`. The sign is `+` for `l² > k2²` and `-` for
//! `l² < k2²`; at `l² = k2²` the two roots merge at exactly `1/2`. When the
//! discriminant is negative the coefficient is complex with `|φ| = 1/2`;
//! such values are kept and flagged rather than rejected, and the
//! metastability classification downstream treats them as instability
//! evidence.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{wavevector, LatticeVector, PhysicalParams};
use crate::potential::{FourierTable, PotentialError, TableMode};

#[derive(Debug, Error, PartialEq)]
pub enum PairSeriesError {
    #[error("coefficient denominator v_(l-k2) + v_(l+k2) vanishes at l = {l}")]
    ZeroDenominator { l: LatticeVector },
    #[error("standing-wave family requires a transverse k, got {k}")]
    NotTransverse { k: LatticeVector },
    #[error("k2 = {k2} outside the l-sum cutoff {cutoff}")]
    K2OutsideCutoff { k2: LatticeVector, cutoff: i32 },
    #[error(
        "truncation dominates the stationarity residual: boundary {boundary:e} vs interior {interior:e}"
    )]
    TruncationDominates { boundary: f64, interior: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Normalization of the kinetic prefactor in the finite-`N` coefficient.
///
/// `Hbar` is the self-consistent default whose `N → ∞` limit reproduces
/// the limit quadratic; `PlanckH` is the compatibility switch that reads
/// the prefactor as `h = 2πħ` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KineticNorm {
    #[default]
    Hbar,
    PlanckH,
}

/// One pair coefficient, possibly on the complex branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValue {
    pub value: Complex64,
    pub complex_branch: bool,
}

impl PhiValue {
    fn real(v: f64) -> Self {
        Self { value: Complex64::new(v, 0.0), complex_branch: false }
    }
}

/// Kinetic difference `T_l = ħ²(l² - k2²)/2m`.
pub fn kinetic_diff(k2: LatticeVector, l: LatticeVector, p: &PhysicalParams) -> f64 {
    p.kinetic(wavevector(l, p)) - p.kinetic(wavevector(k2, p))
}

/// Quadratic coefficient `b = T_l/V0 - 1` of the limit root identity.
pub fn limit_b(k2: LatticeVector, l: LatticeVector, v0: f64, p: &PhysicalParams) -> f64 {
    kinetic_diff(k2, l, p) / v0 - 1.0
}

fn phi_from_b(b: f64, plus: bool) -> PhiValue {
    let disc = b * b - 1.0;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let v = if plus { (-b + s) / 2.0 } else { (-b - s) / 2.0 };
        PhiValue::real(v)
    } else {
        // conjugate pair; principal (+i) root stored, flagged
        let s = (-disc).sqrt();
        PhiValue { value: Complex64::new(-b / 2.0, s / 2.0), complex_branch: true }
    }
}

/// Limit coefficient `φ_{k2,l}` from the closed form.
pub fn phi_limit(k2: LatticeVector, l: LatticeVector, v0: f64, p: &PhysicalParams) -> PhiValue {
    let t = kinetic_diff(k2, l, p);
    if t == 0.0 {
        return PhiValue::real(0.5);
    }
    phi_from_b(t / v0 - 1.0, t > 0.0)
}

/// Finite-`N` coefficient built from table entries,
/// `φ = -b/2 ± (1/2) sqrt(b² - 1)` with
/// `b = (κ²(l² - k2²)/m - (v_0 + v_{2k2})) / (v_{l-k2} + v_{l+k2})`
/// and `κ = ħ` (default) or `κ = h` (compatibility switch).
pub fn phi_finite_n(
    k2: LatticeVector,
    l: LatticeVector,
    table: &FourierTable,
    norm: KineticNorm,
) -> Result<PhiValue, PairSeriesError> {
    let p = &table.params;
    let t = kinetic_diff(k2, l, p);
    if t == 0.0 {
        // includes l = ±k2, where b = -1 exactly
        return Ok(PhiValue::real(0.5));
    }
    let factor = match norm {
        KineticNorm::Hbar => 1.0,
        KineticNorm::PlanckH => {
            let r = p.planck_h() / p.hbar;
            r * r
        }
    };
    let numerator = 2.0 * factor * t - (table.v_zero() + table.v(k2.scale(2)));
    let denominator = table.v(l - k2) + table.v(l + k2);
    if denominator == 0.0 {
        return Err(PairSeriesError::ZeroDenominator { l });
    }
    Ok(phi_from_b(numerator / denominator, t > 0.0))
}

/// Pair eigenvalue `Ω = ħ²(k1² + k2²)/m + v_0 + v_{2k2}`.
pub fn omega(k1: LatticeVector, k2: LatticeVector, table: &FourierTable) -> f64 {
    let p = &table.params;
    let kin = 2.0 * (p.kinetic(wavevector(k1, p)) + p.kinetic(wavevector(k2, p)));
    kin + table.v_zero() + table.v(k2.scale(2))
}

/// Extensive leading energy `E = N (ħ²(k1² + k2²)/2m + V0/2)`.
pub fn leading_energy(k1: LatticeVector, k2: LatticeVector, p: &PhysicalParams, v0: f64) -> f64 {
    let kin = p.kinetic(wavevector(k1, p)) + p.kinetic(wavevector(k2, p));
    p.n_particles as f64 * (kin + 0.5 * v0)
}

/// A `(k1, k2)` solution of the pair-field stationarity system.
#[derive(Debug, Clone, Serialize)]
pub struct PairSeriesState {
    pub k1: LatticeVector,
    pub k2: LatticeVector,
    pub phi: BTreeMap<LatticeVector, PhiValue>,
    pub omega: f64,
    pub energy: f64,
    pub cutoff: i32,
    /// Standing waves (`k1 = 0`) carry no flow.
    pub no_flow: bool,
}

impl PairSeriesState {
    /// Builds the limit-mode state with `φ` summed over the transverse
    /// lattice within `cutoff`.
    pub fn build_limit(
        k1: LatticeVector,
        k2: LatticeVector,
        v0: f64,
        p: &PhysicalParams,
        cutoff: i32,
    ) -> Result<Self, PairSeriesError> {
        if k2.n2.abs() > cutoff || k2.n3.abs() > cutoff || !k2.is_transverse() {
            return Err(PairSeriesError::K2OutsideCutoff { k2, cutoff });
        }
        let phi = crate::geometry::transverse_box(cutoff)
            .into_iter()
            .map(|l| (l, phi_limit(k2, l, v0, p)))
            .collect();
        let kin = 2.0 * (p.kinetic(wavevector(k1, p)) + p.kinetic(wavevector(k2, p)));
        Ok(Self {
            k1,
            k2,
            phi,
            omega: kin + 2.0 * v0,
            energy: leading_energy(k1, k2, p, v0),
            cutoff,
            no_flow: k1.is_zero(),
        })
    }

    /// Builds the state from a finite-`N` coefficient table.
    pub fn build_finite_n(
        k1: LatticeVector,
        k2: LatticeVector,
        table: &FourierTable,
        norm: KineticNorm,
        cutoff: i32,
    ) -> Result<Self, PairSeriesError> {
        if k2.n2.abs() > cutoff || k2.n3.abs() > cutoff || !k2.is_transverse() {
            return Err(PairSeriesError::K2OutsideCutoff { k2, cutoff });
        }
        let p = &table.params;
        let mut phi = BTreeMap::new();
        for l in crate::geometry::transverse_box(cutoff) {
            phi.insert(l, phi_finite_n(k2, l, table, norm)?);
        }
        Ok(Self {
            k1,
            k2,
            phi,
            omega: omega(k1, k2, table),
            energy: leading_energy(k1, k2, p, table.v0_limit),
            cutoff,
            no_flow: k1.is_zero(),
        })
    }

    pub fn phi_at(&self, l: LatticeVector) -> Option<PhiValue> {
        self.phi.get(&l).copied()
    }
}

/// The `k1 = 0` standing-wave family across the tube.
pub fn standing_wave_family(
    k: LatticeVector,
    p: &PhysicalParams,
    v0: f64,
    cutoff: i32,
) -> Result<PairSeriesState, PairSeriesError> {
    if !k.is_transverse() {
        return Err(PairSeriesError::NotTransverse { k });
    }
    PairSeriesState::build_limit(LatticeVector::ZERO, k, v0, p, cutoff)
}

/// Particle-number functional evaluated analytically in Fourier space,
/// `(φ_{k2,k2} + φ_{k2,-k2})/2`. Must equal `1/2`.
pub fn normalization(state: &PairSeriesState) -> f64 {
    let a = state.phi_at(state.k2).expect("k2 within cutoff by construction");
    let b = state.phi_at(-state.k2).expect("-k2 within cutoff by construction");
    0.5 * (a.value.re + b.value.re)
}

/// Same functional by direct quadrature of the pair fields over the box
/// cross section, on an `n × n` midpoint grid.
pub fn normalization_quadrature(state: &PairSeriesState, p: &PhysicalParams, n: usize) -> f64 {
    let vol = p.volume();
    let k2 = wavevector(state.k2, p);
    let h = p.l2 / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u = [0.0, (i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            let cosk2 = (k2[1] * u[1] + k2[2] * u[2]).cos();
            let mut series = Complex64::new(0.0, 0.0);
            for (&l, phi) in &state.phi {
                let lk = wavevector(l, p);
                let phase = lk[1] * u[1] + lk[2] * u[2];
                series += phi.value * Complex64::new(phase.cos(), phase.sin());
            }
            sum += cosk2 * series.re * h * h;
        }
    }
    // ∬ Φ⁺Φ dx dy = vol · L1 · ∬ g(u2,u3) du2 du3 with g = cos(k2·u)·Σφ e^{il·u} / vol²
    vol * p.l1 * sum / (vol * vol)
}

/// Which stationarity system a residual is evaluated against.
pub enum ResidualSystem<'a> {
    /// Delta-interaction limit with coupling `V0`.
    Limit { v0: f64 },
    /// Finite-`N` system with coefficients from the table.
    FiniteN(&'a FourierTable),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Max residual over modes strictly inside the cutoff.
    pub max_interior: f64,
    /// Max residual over modes on the cutoff boundary.
    pub max_boundary: f64,
    pub modes_checked: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.max_interior.max(self.max_boundary)
    }
}

/// Projects the pair fields onto the stationarity system mode by mode and
/// returns `max |LHS - RHS| / |Ω|` split into interior and cutoff-boundary
/// modes.
///
/// Per transverse mode `l` the projected equation reads
/// `Ω φ_l = ħ²(k1² + l²)/m φ_l + (v_{l-k2} + v_{l+k2})(φ_l² + 1/4)`,
/// which in the limit system becomes `Ω φ = K φ + 2V0 φ² + V0/2`; for the
/// exact coefficients this is the quadratic root identity and the residual
/// vanishes to rounding.
pub fn stationarity_residual(
    state: &PairSeriesState,
    p: &PhysicalParams,
    system: &ResidualSystem,
) -> Result<ResidualReport, PairSeriesError> {
    let k1 = state.k1;
    let k2 = state.k2;
    let omega_sys = match system {
        ResidualSystem::Limit { v0 } => {
            let kin = 2.0 * (p.kinetic(wavevector(k1, p)) + p.kinetic(wavevector(k2, p)));
            kin + 2.0 * v0
        }
        ResidualSystem::FiniteN(table) => omega(k1, k2, table),
    };
    let mut max_interior: f64 = 0.0;
    let mut max_boundary: f64 = 0.0;
    for (&l, phi) in &state.phi {
        let kin_l = 2.0 * (p.kinetic(wavevector(k1, p)) + p.kinetic(wavevector(l, p)));
        let (pair_coupling, source) = match system {
            ResidualSystem::Limit { v0 } => (2.0 * v0, 0.5 * v0),
            ResidualSystem::FiniteN(table) => {
                let c = table.v(l - k2) + table.v(l + k2);
                (c, 0.25 * c)
            }
        };
        let phi_c = phi.value;
        let lhs = omega_sys * phi_c;
        let rhs = kin_l * phi_c + pair_coupling * phi_c * phi_c + source;
        let r = (lhs - rhs).norm() / omega_sys.abs();
        let on_boundary = l.n2.abs() == state.cutoff || l.n3.abs() == state.cutoff;
        if on_boundary {
            max_boundary = max_boundary.max(r);
        } else {
            max_interior = max_interior.max(r);
        }
    }
    if max_boundary > 1e3 * max_interior && max_boundary > 1e-12 {
        return Err(PairSeriesError::TruncationDominates {
            boundary: max_boundary,
            interior: max_interior,
        });
    }
    Ok(ResidualReport { max_interior, max_boundary, modes_checked: state.phi.len() })
}

/// Residual of the root identity `φ² + bφ + 1/4 = 0` for one coefficient.
pub fn root_identity_residual(
    k2: LatticeVector,
    l: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    phi: Complex64,
) -> f64 {
    let b = limit_b(k2, l, v0, p);
    (phi * phi + b * phi + 0.25).norm()
}

/// Convenience: finite-`N` deviation diagnostics used by the convergence
/// checks. Returns `(max_q |v_q - V0|, residual of the limit state against
/// the finite-N system)`.
pub fn limit_convergence_diagnostics(
    k2: LatticeVector,
    table: &FourierTable,
    cutoff: i32,
) -> Result<(f64, f64), PairSeriesError> {
    debug_assert_eq!(table.mode, TableMode::FiniteN);
    let p = table.params;
    let state = PairSeriesState::build_limit(LatticeVector::ZERO, k2, table.v0_limit, &p, cutoff)?;
    let residual = stationarity_residual(&state, &p, &ResidualSystem::FiniteN(table))?;
    Ok((table.max_deviation_from_v0(), residual.max()))
}
