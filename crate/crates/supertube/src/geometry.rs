//! Box geometry, unit conventions and the wave-vector lattice shared by
//! every other module.
//!
//! The system lives in a rectangular box with side lengths `L1 × L2 × L2`,
//! periodic along the long axis. All wave vectors are points of the lattice
//! `2π(n1/L1, n2/L2, n3/L2)` with signed integer mode numbers. Energies and
//! lengths are expressed in a unit system where `ħ` and `m` default to 1;
//! both are overridable. Planck's constant `h` always means `2πħ` here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("physical parameters out of range: {0}")]
    InvalidParams(String),
}

/// Geometry and unit system of one simulation run.
///
/// `l2` is the transverse side of the box; where a tube of circular cross
/// section is meant, `l2` doubles as the tube diameter (`l2 = 2R`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub n_particles: u64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, l1: 10.0, l2: 1.0, n_particles: 1_000_000 }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, l1: f64, l2: f64, n_particles: u64) -> Result<Self, GeometryError> {
        let p = Self { hbar, mass, l1, l2, n_particles };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = self.hbar > 0.0 && self.mass > 0.0 && self.l1 > 0.0 && self.l2 > 0.0;
        if !ok {
            return Err(GeometryError::InvalidParams(format!(
                "hbar={}, m={}, L1={}, L2={} (all must be > 0)",
                self.hbar, self.mass, self.l1, self.l2
            )));
        }
        if self.n_particles < 1 {
            return Err(GeometryError::InvalidParams("N must be >= 1".into()));
        }
        Ok(())
    }

    /// Long-tube regime flag: `L1 >= 10 L2`.
    pub fn elongated(&self) -> bool {
        self.l1 >= 10.0 * self.l2
    }

    /// Planck's constant `h = 2πħ`.
    pub fn planck_h(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar
    }

    /// Box volume `L1·L2²`.
    pub fn volume(&self) -> f64 {
        self.l1 * self.l2 * self.l2
    }

    /// Kinetic energy `ħ²k²/2m` of a plane wave with wave vector `k`.
    pub fn kinetic(&self, k: [f64; 3]) -> f64 {
        self.hbar * self.hbar * norm_sq(k) / (2.0 * self.mass)
    }
}

/// A point of the box lattice, stored as signed mode numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub n1: i32,
    pub n2: i32,
    pub n3: i32,
}

impl LatticeVector {
    pub const ZERO: Self = Self { n1: 0, n2: 0, n3: 0 };

    pub fn new(n1: i32, n2: i32, n3: i32) -> Self {
        Self { n1, n2, n3 }
    }

    /// Purely transverse lattice vector `2π(0, n2/L2, n3/L2)`.
    pub fn transverse(n2: i32, n3: i32) -> Self {
        Self { n1: 0, n2, n3 }
    }

    /// Purely longitudinal lattice vector `2π(n1/L1, 0, 0)`.
    pub fn longitudinal(n1: i32) -> Self {
        Self { n1, n2: 0, n3: 0 }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn is_transverse(&self) -> bool {
        self.n1 == 0
    }

    pub fn is_longitudinal(&self) -> bool {
        self.n2 == 0 && self.n3 == 0
    }

    pub fn neg(&self) -> Self {
        Self { n1: -self.n1, n2: -self.n2, n3: -self.n3 }
    }

    pub fn add(&self, other: Self) -> Self {
        Self { n1: self.n1 + other.n1, n2: self.n2 + other.n2, n3: self.n3 + other.n3 }
    }

    pub fn sub(&self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Integer scalar multiple.
    pub fn scale(&self, c: i32) -> Self {
        Self { n1: c * self.n1, n2: c * self.n2, n3: c * self.n3 }
    }
}

impl std::ops::Add for LatticeVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        LatticeVector::add(&self, rhs)
    }
}

impl std::ops::Sub for LatticeVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        LatticeVector::sub(&self, rhs)
    }
}

impl std::ops::Neg for LatticeVector {
    type Output = Self;
    fn neg(self) -> Self {
        LatticeVector::neg(&self)
    }
}

impl std::fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n1, self.n2, self.n3)
    }
}

/// Wave vector `2π(n1/L1, n2/L2, n3/L2)` of a lattice point.
pub fn wavevector(n: LatticeVector, p: &PhysicalParams) -> [f64; 3] {
    let tau = 2.0 * std::f64::consts::PI;
    [
        tau * n.n1 as f64 / p.l1,
        tau * n.n2 as f64 / p.l2,
        tau * n.n3 as f64 / p.l2,
    ]
}

/// Flow velocity `ħ k1 / m` carried by a condensate wave vector.
pub fn flow_velocity(k1: [f64; 3], p: &PhysicalParams) -> [f64; 3] {
    let c = p.hbar / p.mass;
    [c * k1[0], c * k1[1], c * k1[2]]
}

pub fn norm_sq(k: [f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

pub fn norm(k: [f64; 3]) -> f64 {
    norm_sq(k).sqrt()
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// All lattice vectors with `|n1| <= c1`, `|n2|,|n3| <= c23`, in
/// lexicographic mode-number order.
pub fn lattice_box(c1: i32, c23: i32) -> Vec<LatticeVector> {
    let mut out = Vec::with_capacity(
        ((2 * c1 + 1) as usize) * ((2 * c23 + 1) as usize).pow(2),
    );
    for n1 in -c1..=c1 {
        for n2 in -c23..=c23 {
            for n3 in -c23..=c23 {
                out.push(LatticeVector::new(n1, n2, n3));
            }
        }
    }
    out
}

/// Transverse lattice vectors `(0, n2, n3)` with `|n2|,|n3| <= cutoff`,
/// lexicographic order.
pub fn transverse_box(cutoff: i32) -> Vec<LatticeVector> {
    let mut out = Vec::with_capacity(((2 * cutoff + 1) as usize).pow(2));
    for n2 in -cutoff..=cutoff {
        for n3 in -cutoff..=cutoff {
            out.push(LatticeVector::transverse(n2, n3));
        }
    }
    out
}
