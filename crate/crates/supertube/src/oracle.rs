//! Independent brute-force validation: exact diagonalization of the
//! momentum-space many-body Hamiltonian on a small mode set, compared
//! against the quasiparticle dispersion.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = Σ_k (ħ²k²/2m) n_k + (1/2) Σ v_q a†_{k1+q} a†_{k2-q} a_{k2} a_{k1}
//! ```
//!
//! restricted to the chosen modes; interaction terms that would scatter
//! outside the mode set are dropped and counted. Total momentum is
//! conserved exactly, so the matrix is block-diagonal over momentum
//! sectors by construction.

use std::collections::{BTreeMap, HashMap};

use nalgebra as na;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{wavevector, LatticeVector};
#[cfg(test)]
use crate::geometry::PhysicalParams;
use crate::potential::FourierTable;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("basis too large: {what}")]
    BasisTooLarge { what: String },
    #[error("eigensolver failed in sector {sector:?}: {detail}")]
    NonConvergence { sector: (i64, i64, i64), detail: String },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
}

pub const MAX_MODES: usize = 7;
pub const MAX_PARTICLES: u32 = 10;
pub const MAX_DIMENSION: usize = 200_000;
/// Sectors up to this size are diagonalized densely (full spectrum).
pub const DENSE_LIMIT: usize = 2000;
/// Number of low eigenvalues kept on the iterative path.
pub const ITERATIVE_COUNT: usize = 20;

/// Occupation-number basis over a fixed mode set at fixed particle number.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub modes: Vec<LatticeVector>,
    pub n_particles: u32,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// Momentum sectors: total mode-number triple -> state indices.
    pub sectors: BTreeMap<(i64, i64, i64), Vec<usize>>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut out = 1u64;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

impl FockBasis {
    pub fn new(modes: Vec<LatticeVector>, n_particles: u32) -> Result<Self, OracleError> {
        if modes.is_empty() {
            return Err(OracleError::InvalidBasis("mode set is empty".into()));
        }
        if modes.len() > MAX_MODES {
            return Err(OracleError::BasisTooLarge {
                what: format!("{} modes > {MAX_MODES}", modes.len()),
            });
        }
        if n_particles > MAX_PARTICLES {
            return Err(OracleError::BasisTooLarge {
                what: format!("{n_particles} particles > {MAX_PARTICLES}"),
            });
        }
        let mut sorted = modes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(OracleError::InvalidBasis("duplicate modes".into()));
        }
        let dim = binomial(n_particles as u64 + modes.len() as u64 - 1, modes.len() as u64 - 1);
        if dim as usize > MAX_DIMENSION {
            return Err(OracleError::BasisTooLarge { what: format!("dimension {dim}") });
        }

        let mut states = Vec::with_capacity(dim as usize);
        let mut occ = vec![0u8; modes.len()];
        enumerate_occupations(n_particles as u8, 0, &mut occ, &mut states);
        debug_assert_eq!(states.len() as u64, dim);

        let index: HashMap<Vec<u8>, usize> =
            states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut sectors: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            sectors.entry(total_momentum(s, &modes)).or_default().push(i);
        }
        Ok(Self { modes, n_particles, states, index, sectors })
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    fn mode_index(&self, k: LatticeVector) -> Option<usize> {
        self.modes.iter().position(|&m| m == k)
    }
}

fn enumerate_occupations(left: u8, mode: usize, occ: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if mode == occ.len() - 1 {
        occ[mode] = left;
        out.push(occ.clone());
        return;
    }
    for take in (0..=left).rev() {
        occ[mode] = take;
        enumerate_occupations(left - take, mode + 1, occ, out);
    }
}

fn total_momentum(occ: &[u8], modes: &[LatticeVector]) -> (i64, i64, i64) {
    let mut p = (0i64, 0i64, 0i64);
    for (n, m) in occ.iter().zip(modes) {
        p.0 += *n as i64 * m.n1 as i64;
        p.1 += *n as i64 * m.n2 as i64;
        p.2 += *n as i64 * m.n3 as i64;
    }
    p
}

/// One momentum block of the Hamiltonian, stored as triplets.
#[derive(Debug, Clone)]
pub struct SectorBlock {
    pub momentum: (i64, i64, i64),
    pub global_indices: Vec<usize>,
    pub dim: usize,
    triplets: Vec<(u32, u32, f64)>,
}

impl SectorBlock {
    pub fn to_dense(&self) -> na::DMatrix<f64> {
        let mut m = na::DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.triplets {
            m[(i as usize, j as usize)] += v;
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for &(i, j, v) in &self.triplets {
            y[i as usize] += v * x[j as usize];
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.to_dense().norm()
    }
}

/// The assembled block-diagonal Hamiltonian.
#[derive(Debug, Clone)]
pub struct OracleHamiltonian {
    pub sectors: Vec<SectorBlock>,
    /// Interaction terms dropped because they scatter outside the mode set.
    pub dropped_terms: u64,
    pub dimension: usize,
}

/// Builds the Hamiltonian matrix over the basis, using `v_q` from the
/// table. Momentum conservation is structural: every generated element
/// stays inside its source sector.
pub fn build_hamiltonian(basis: &FockBasis, table: &FourierTable) -> OracleHamiltonian {
    let params = &table.params;
    let kinetic: Vec<f64> =
        basis.modes.iter().map(|&m| params.kinetic(wavevector(m, params))).collect();

    let per_sector: Vec<(SectorBlock, u64)> = basis
        .sectors
        .par_iter()
        .map(|(&momentum, indices)| {
            let local: HashMap<usize, usize> =
                indices.iter().enumerate().map(|(li, &gi)| (gi, li)).collect();
            let dim = indices.len();
            let mut dropped = 0u64;
            let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
            for (col_local, &gi) in indices.iter().enumerate() {
                let occ = &basis.states[gi];
                let mut row_acc: HashMap<usize, f64> = HashMap::new();
                // kinetic diagonal
                let diag: f64 =
                    occ.iter().zip(&kinetic).map(|(&n, &t)| n as f64 * t).sum();
                *row_acc.entry(col_local).or_default() += diag;

                // (1/2) Σ v_q a†_{k1+q} a†_{k2-q} a_{k2} a_{k1}
                for i in 0..basis.modes.len() {
                    if occ[i] == 0 {
                        continue;
                    }
                    let amp1 = (occ[i] as f64).sqrt();
                    let mut occ1 = occ.clone();
                    occ1[i] -= 1;
                    for j in 0..basis.modes.len() {
                        if occ1[j] == 0 {
                            continue;
                        }
                        let amp2 = (occ1[j] as f64).sqrt();
                        let mut occ2 = occ1.clone();
                        occ2[j] -= 1;
                        let ktot = basis.modes[i] + basis.modes[j];
                        for c1 in 0..basis.modes.len() {
                            let q = basis.modes[c1] - basis.modes[i];
                            let k_c2 = ktot - basis.modes[c1];
                            let Some(c2) = basis.mode_index(k_c2) else {
                                dropped += 1;
                                continue;
                            };
                            let vq = table.v(q);
                            if vq == 0.0 {
                                continue;
                            }
                            let mut occ3 = occ2.clone();
                            let amp3 = (occ3[c2] as f64 + 1.0).sqrt();
                            occ3[c2] += 1;
                            let amp4 = (occ3[c1] as f64 + 1.0).sqrt();
                            occ3[c1] += 1;
                            let target = basis
                                .index_of(&occ3)
                                .expect("occupation stays within the basis");
                            debug_assert_eq!(
                                total_momentum(&occ3, &basis.modes),
                                momentum,
                                "momentum conservation violated"
                            );
                            let row_local = local[&target];
                            *row_acc.entry(row_local).or_default() +=
                                0.5 * vq * amp1 * amp2 * amp3 * amp4;
                        }
                    }
                }
                let mut rows: Vec<(usize, f64)> =
                    row_acc.into_iter().filter(|&(_, v)| v != 0.0).collect();
                rows.sort_by_key(|&(r, _)| r);
                for (r, v) in rows {
                    triplets.push((r as u32, col_local as u32, v));
                }
            }
            (SectorBlock { momentum, global_indices: indices.clone(), dim, triplets }, dropped)
        })
        .collect();

    let mut sectors = Vec::with_capacity(per_sector.len());
    let mut dropped_terms = 0;
    for (block, dropped) in per_sector {
        dropped_terms += dropped;
        sectors.push(block);
    }
    OracleHamiltonian { sectors, dropped_terms, dimension: basis.dimension() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSpectrum {
    pub momentum: (i64, i64, i64),
    /// Ascending eigenvalues; the full spectrum on the dense path, the
    /// lowest few on the iterative path.
    pub eigenvalues: Vec<f64>,
    pub complete: bool,
}

/// Spectrum of the block Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSpectrum {
    pub sectors: Vec<SectorSpectrum>,
    pub ground_energy: f64,
    pub ground_sector: (i64, i64, i64),
    /// `(momentum transfer q, E_min(P0 + q) - E0)` for each nonzero mode.
    pub excitation_gaps: Vec<(LatticeVector, f64)>,
}

pub fn diagonalize(
    h: &OracleHamiltonian,
    basis: &FockBasis,
) -> Result<ExactSpectrum, OracleError> {
    diagonalize_with_dense_limit(h, basis, DENSE_LIMIT)
}

/// Same as [`diagonalize`], with the dense/iterative switchover exposed
/// for testing the iterative path on small problems.
pub fn diagonalize_with_dense_limit(
    h: &OracleHamiltonian,
    basis: &FockBasis,
    dense_limit: usize,
) -> Result<ExactSpectrum, OracleError> {
    let spectra: Result<Vec<SectorSpectrum>, OracleError> = h
        .sectors
        .par_iter()
        .map(|block| {
            if block.dim <= dense_limit {
                dense_sector(block)
            } else {
                lanczos_sector(block, ITERATIVE_COUNT)
            }
        })
        .collect();
    let sectors = spectra?;
    let (ground_sector, ground_energy) = sectors
        .iter()
        .map(|s| (s.momentum, s.eigenvalues[0]))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .expect("at least one sector");

    let by_momentum: BTreeMap<(i64, i64, i64), &SectorSpectrum> =
        sectors.iter().map(|s| (s.momentum, s)).collect();
    let mut excitation_gaps = Vec::new();
    for &q in &basis.modes {
        if q.is_zero() {
            continue;
        }
        let target = (
            ground_sector.0 + q.n1 as i64,
            ground_sector.1 + q.n2 as i64,
            ground_sector.2 + q.n3 as i64,
        );
        if let Some(s) = by_momentum.get(&target) {
            excitation_gaps.push((q, s.eigenvalues[0] - ground_energy));
        }
    }
    Ok(ExactSpectrum { sectors, ground_energy, ground_sector, excitation_gaps })
}

fn dense_sector(block: &SectorBlock) -> Result<SectorSpectrum, OracleError> {
    let m = block.to_dense();
    let sym = (m.transpose() - &m).norm();
    if sym > 1e-10 * m.norm().max(1.0) {
        return Err(OracleError::NonConvergence {
            sector: block.momentum,
            detail: format!("matrix not symmetric: asymmetry {sym:e}"),
        });
    }
    let eig = na::SymmetricEigen::new(m.clone());
    // residual check on the lowest eigenpair
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let lowest = order[0];
    let x = eig.eigenvectors.column(lowest);
    let residual = (&m * x - eig.eigenvalues[lowest] * x).norm();
    let tol = 1e-8 * m.norm().max(1e-300);
    if residual > tol {
        return Err(OracleError::NonConvergence {
            sector: block.momentum,
            detail: format!("dense residual {residual:e} > {tol:e}"),
        });
    }
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SectorSpectrum { momentum: block.momentum, eigenvalues: vals, complete: true })
}

/// Lanczos with full reorthogonalization for the lowest `want` eigenvalues.
fn lanczos_sector(block: &SectorBlock, want: usize) -> Result<SectorSpectrum, OracleError> {
    let n = block.dim;
    let want = want.min(n);
    let steps = (3 * want + 40).min(n);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    // deterministic start vector
    let mut v0: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 2654435761) % 97) as f64).collect();
    normalize(&mut v0);
    vs.push(v0);

    let mut w = vec![0.0; n];
    for m in 0..steps {
        block.matvec(&vs[m], &mut w);
        let a = dot_slice(&vs[m], &w);
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&vs[m]) {
            *wi -= a * vi;
        }
        if m > 0 {
            let b_prev = beta[m - 1];
            for (wi, vi) in w.iter_mut().zip(&vs[m - 1]) {
                *wi -= b_prev * vi;
            }
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &vs {
                let c = dot_slice(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = dot_slice(&w, &w).sqrt();
        if b < 1e-13 || m + 1 == steps {
            beta.push(b);
            break;
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        vs.push(next);
    }

    let m_dim = alpha.len();
    let mut t = na::DMatrix::zeros(m_dim, m_dim);
    for i in 0..m_dim {
        t[(i, i)] = alpha[i];
        if i + 1 < m_dim {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = na::SymmetricEigen::new(t);
    let mut ritz: Vec<(f64, f64)> = (0..m_dim)
        .map(|i| {
            let last = eig.eigenvectors[(m_dim - 1, i)];
            let resid = beta[m_dim - 1].abs() * last.abs();
            (eig.eigenvalues[i], resid)
        })
        .collect();
    ritz.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let scale = block.frobenius().max(1e-300);
    let kept: Vec<f64> = ritz.iter().take(want).map(|&(v, _)| v).collect();
    let worst = ritz.iter().take(want).map(|&(_, r)| r).fold(0.0, f64::max);
    if worst > 1e-8 * scale {
        return Err(OracleError::NonConvergence {
            sector: block.momentum,
            detail: format!("lanczos residual {worst:e} > {:e}", 1e-8 * scale),
        });
    }
    Ok(SectorSpectrum { momentum: block.momentum, eigenvalues: kept, complete: false })
}

fn normalize(v: &mut [f64]) {
    let n = dot_slice(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Density factor entering the dispersion the exact gaps are compared to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityConvention {
    #[default]
    N,
    NMinusOne,
}

impl DensityConvention {
    pub fn rho(&self, n: u32) -> f64 {
        match self {
            DensityConvention::N => n as f64,
            DensityConvention::NMinusOne => (n as f64 - 1.0).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapComparison {
    pub q: LatticeVector,
    pub exact_gap: f64,
    pub epsilon: f64,
    pub relative_deviation: f64,
}

/// Exact gaps vs the dispersion `ε(q) = sqrt((T_q + ρ v_q)² - (ρ v_q)²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub convention: DensityConvention,
    pub rho: f64,
    pub rows: Vec<GapComparison>,
    pub max_relative_deviation: f64,
}

pub fn compare_bogoliubov(
    spectrum: &ExactSpectrum,
    basis: &FockBasis,
    table: &FourierTable,
    convention: DensityConvention,
) -> CompareReport {
    let params = &table.params;
    let rho = convention.rho(basis.n_particles);
    let mut rows = Vec::new();
    let mut max_rel: f64 = 0.0;
    for &(q, gap) in &spectrum.excitation_gaps {
        let t = params.kinetic(wavevector(q, params));
        let coupling = rho * table.v(q);
        let eps = ((t + coupling) * (t + coupling) - coupling * coupling).max(0.0).sqrt();
        let rel = if eps != 0.0 { (gap - eps).abs() / eps } else { gap.abs() };
        max_rel = max_rel.max(rel);
        rows.push(GapComparison { q, exact_gap: gap, epsilon: eps, relative_deviation: rel });
    }
    CompareReport { convention, rho, rows, max_relative_deviation: max_rel }
}
