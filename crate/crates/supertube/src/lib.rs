//! Quasiparticle spectra of a weakly interacting Bose gas in a narrow
//! periodic channel.
//!
//! The crate computes three families of excitations over a rectangular
//! `L1 × L2 × L2` box and the superfluidity criterion they imply:
//!
//! * the running-wave (Bogoliubov) series with its Landau critical
//!   velocity ([`bogoliubov`]),
//! * the transverse pair series built from standing waves across the tube
//!   ([`pairseries`]), with its variational quasiparticle spectrum and
//!   stability classification ([`variational`]),
//! * the resonance analysis between the two and the resulting critical
//!   velocity `min(v_landau, 2πħ/(m L2))` ([`critical`]).
//!
//! An independent exact-diagonalization oracle ([`oracle`]) validates the
//! asymptotic dispersion on small systems. All computations run in a unit
//! system with configurable `ħ` and `m` (both default 1) and use the box
//! lattice `2π(n1/L1, n2/L2, n3/L2)` throughout ([`geometry`]). The pair
//! interaction is a finite even potential whose box Fourier coefficients
//! and limit coupling `V0` live in [`potential`].

pub mod bogoliubov;
pub mod config;
pub mod critical;
pub mod geometry;
pub mod oracle;
pub mod pairseries;
pub mod potential;
pub mod report;
pub mod variational;
pub mod verify;

pub(crate) mod quad;

pub use config::RunConfig;
pub use geometry::{LatticeVector, PhysicalParams};
pub use potential::{FourierTable, PotentialSpec, TableMode};
