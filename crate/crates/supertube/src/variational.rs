//! The variational quasiparticle spectrum around a pair-series state: the
//! 4×4 block matrix, its exact reduction to a 2×2 problem, the branch
//! selection rule, closed-form branch energies and series classification.
//!
//! For each transverse `k2` and lattice mode `l ≠ -k2` (with partner
//! `l1 = l + 2 k2`) the closed subsystem reads `λ̃ X = M X` with
//!
//! ```text
//! M = [ C  -V0·I ]        C = [ B_l   V0   ]     D = [ d11  d12 ]
//!     [ D   -C   ],           [ V0    B_l1 ],        [ d12  d22 ],
//! ```
//!
//! and reduces exactly to `λ̃² u = (C² - V0 D) u`. Physical energies carry
//! the flow drift: `λ = λ̃ - ħ² k1·(k2 + l)/m`.
//!
//! Two algebraic variants of the block are kept:
//!
//! * `Corrected` (default): `B_l = T_l + 2 V0 φ_l`, `d11 = 4 V0 φ_l`,
//!   `d12 = 2 V0 (φ_l + φ_l1)`. This is the self-consistent linearization
//!   of the stationarity system; with it `C² - V0 D` collapses to
//!   `[[T_l², V0(T_l+T_l1)], [V0(T_l+T_l1), T_l1²]]` and the `k2 = 0`
//!   spectrum reproduces the running-wave dispersion exactly.
//! * `Literal`: `B_l = T_l + V0 φ_l`, `d11 = 2 V0 φ_l`,
//!   `d12 = V0 (φ_l + φ_l1)` — the alternative published form, kept behind
//!   a switch for comparison; it does not reduce to the running-wave
//!   series at `k2 = 0`.

use nalgebra as na;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dot, wavevector, LatticeVector, PhysicalParams};
use crate::pairseries::{kinetic_diff, phi_limit, PhiValue};

type C2 = na::Matrix2<Complex64>;
type C4 = na::Matrix4<Complex64>;

#[derive(Debug, Error, PartialEq)]
pub enum VariationalError {
    #[error("mode l = -k2 = {l} is excluded from the subsystem")]
    ExcludedMode { l: LatticeVector },
    #[error("eigensolver did not converge: residual {residual:e} exceeds {tolerance:e} (cond ~ {condition:e})")]
    NonConvergence { residual: f64, tolerance: f64, condition: f64 },
    #[error("direct 4x4 spectrum disagrees with the 2x2 reduction: max deviation {max_err:e}")]
    SpectrumMismatch { max_err: f64 },
    #[error("lattice scan is empty (cutoff {cutoff})")]
    EmptyScan { cutoff: i32 },
}

/// Algebraic form of the block entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixVariant {
    #[default]
    Corrected,
    Literal,
}

/// Diagonal energy `B_l = ħ²(l² - k2²)/2m + V0 φ_{k2,l}`.
pub fn b_coeff(
    l: LatticeVector,
    k2: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    phi: Complex64,
) -> Complex64 {
    Complex64::from(kinetic_diff(k2, l, p)) + v0 * phi
}

/// Flow drift `ħ² k1·(k2 + l)/m` subtracted from `λ̃` to form `λ`.
pub fn drift(k1: LatticeVector, k2: LatticeVector, l: LatticeVector, p: &PhysicalParams) -> f64 {
    let k1w = wavevector(k1, p);
    let kl = wavevector(k2 + l, p);
    p.hbar * p.hbar * dot(k1w, kl) / p.mass
}

/// One assembled 4×4 block.
#[derive(Debug, Clone)]
pub struct VariationalBlock {
    pub k1: LatticeVector,
    pub k2: LatticeVector,
    pub l: LatticeVector,
    pub l1: LatticeVector,
    pub v0: f64,
    pub variant: MatrixVariant,
    /// `B_l`, `B_l1` in the diagonal form of the active variant.
    pub b_l: Complex64,
    pub b_l1: Complex64,
    pub c: C2,
    pub d: C2,
    pub m: C4,
    /// Either coefficient came out on the complex branch.
    pub complex_phi: bool,
    /// `k2 = 0` degeneracy: the two mode doublets coincide and the
    /// antisymmetric combination has zero physical norm.
    pub degenerate: bool,
}

/// Assembles the block from the two pair coefficients.
pub fn build_block(
    k1: LatticeVector,
    k2: LatticeVector,
    l: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    phi_l: PhiValue,
    phi_l1: PhiValue,
    variant: MatrixVariant,
) -> Result<VariationalBlock, VariationalError> {
    if l == -k2 {
        return Err(VariationalError::ExcludedMode { l });
    }
    let l1 = l + k2.scale(2);
    let t_l = Complex64::from(kinetic_diff(k2, l, p));
    let t_l1 = Complex64::from(kinetic_diff(k2, l1, p));
    let (diag_factor, d_factor) = match variant {
        MatrixVariant::Corrected => (2.0, 2.0),
        MatrixVariant::Literal => (1.0, 1.0),
    };
    let b_l = t_l + diag_factor * v0 * phi_l.value;
    let b_l1 = t_l1 + diag_factor * v0 * phi_l1.value;
    let v0c = Complex64::from(v0);
    let c = C2::new(b_l, v0c, v0c, b_l1);
    let d12 = d_factor * v0 * (phi_l.value + phi_l1.value);
    let d = C2::new(
        d_factor * 2.0 * v0 * phi_l.value,
        d12,
        d12,
        d_factor * 2.0 * v0 * phi_l1.value,
    );
    let zero = Complex64::from(0.0);
    #[rustfmt::skip]
    let m = C4::new(
        c[(0, 0)], c[(0, 1)], -v0c,      zero,
        c[(1, 0)], c[(1, 1)], zero,      -v0c,
        d[(0, 0)], d[(0, 1)], -c[(0, 0)], -c[(0, 1)],
        d[(1, 0)], d[(1, 1)], -c[(1, 0)], -c[(1, 1)],
    );
    Ok(VariationalBlock {
        k1,
        k2,
        l,
        l1,
        v0,
        variant,
        b_l,
        b_l1,
        c,
        d,
        m,
        complex_phi: phi_l.complex_branch || phi_l1.complex_branch,
        degenerate: k2.is_zero(),
    })
}

/// Block with limit-mode coefficients computed on the fly.
pub fn build_block_limit(
    k1: LatticeVector,
    k2: LatticeVector,
    l: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    variant: MatrixVariant,
) -> Result<VariationalBlock, VariationalError> {
    let phi_l = phi_limit(k2, l, v0, p);
    let phi_l1 = phi_limit(k2, l + k2.scale(2), v0, p);
    build_block(k1, k2, l, v0, p, phi_l, phi_l1, variant)
}

/// One quasiparticle branch of a block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiparticleBranch {
    /// 1 for the larger `λ̃²` family, 2 for the smaller.
    pub series: u8,
    pub k1: LatticeVector,
    pub k2: LatticeVector,
    pub l: LatticeVector,
    /// Intrinsic eigenvalue of the block.
    pub lambda_tilde: Complex64,
    /// Flow-shifted energy `λ = λ̃ - ħ²k1·(k2+l)/m`.
    pub lambda: Complex64,
    /// Sign of the `±sqrt` choice.
    pub sign: i8,
    pub selected: bool,
    pub complex: bool,
    /// Zero-physical-norm combination at the `k2 = 0` degeneracy.
    pub spurious: bool,
}

/// Branch-selection functional `|u1|² + |u2|² - |v1|² - |v2|²`.
pub fn selection_functional(x: &na::Vector4<Complex64>) -> f64 {
    x[0].norm_sqr() + x[1].norm_sqr() - x[2].norm_sqr() - x[3].norm_sqr()
}

/// Selection rule: keep the branch iff the functional is positive.
pub fn selection_rule(x: &na::Vector4<Complex64>) -> bool {
    selection_functional(x) > 0.0
}

fn frob(m: &C4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a complex 2×2 matrix by the stable quadratic formula.
fn eig2(a: &C2) -> (Complex64, Complex64) {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    // pick the addition that avoids cancellation
    let q = if (tr + disc).norm() >= (tr - disc).norm() { tr + disc } else { tr - disc };
    if q.norm() == 0.0 {
        return (Complex64::from(0.0), Complex64::from(0.0));
    }
    let r1 = q / 2.0;
    let r2 = det / r1;
    (r1, r2)
}

/// Null vector of `A - μI` for an eigenvalue `μ` of a 2×2 matrix.
fn null_vector(a: &C2, mu: Complex64) -> na::Vector2<Complex64> {
    let r1 = na::Vector2::new(a[(0, 1)], mu - a[(0, 0)]);
    let r2 = na::Vector2::new(mu - a[(1, 1)], a[(1, 0)]);
    let v = if r1.norm() >= r2.norm() { r1 } else { r2 };
    if v.norm() == 0.0 {
        na::Vector2::new(Complex64::from(1.0), Complex64::from(0.0))
    } else {
        v / Complex64::from(v.norm())
    }
}

/// Characteristic polynomial coefficients of a 4×4 matrix
/// (Faddeev–LeVerrier): `λ⁴ + c3 λ³ + c2 λ² + c1 λ + c0`.
fn char_poly(m: &C4) -> [Complex64; 4] {
    let i = C4::identity();
    let m1 = *m;
    let c3 = -m1.trace();
    let m2 = m * (m1 + i * c3);
    let c2 = -m2.trace() / 2.0;
    let m3 = m * (m2 + i * c2);
    let c1 = -m3.trace() / 3.0;
    let m4 = m * (m3 + i * c1);
    let c0 = -m4.trace() / 4.0;
    [c3, c2, c1, c0]
}

/// All four roots of `λ⁴ + c3λ³ + c2λ² + c1λ + c0` by Durand–Kerner.
fn quartic_roots(c: [Complex64; 4]) -> [Complex64; 4] {
    let p = |z: Complex64| ((z + c[0]) * z + c[1]) * z * z + c[2] * z + c[3];
    let scale = c
        .iter()
        .zip([1.0, 2.0, 3.0, 4.0])
        .map(|(ci, k)| ci.norm().powf(1.0 / k))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return [Complex64::from(0.0); 4];
    }
    let r = 1.0 + scale;
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..4).map(|k| r * seed.powu(k as u32 + 1)).collect();
    for _ in 0..400 {
        let mut max_step = 0.0_f64;
        for i in 0..4 {
            let mut denom = Complex64::from(1.0);
            for j in 0..4 {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // nudge coincident iterates apart
                z[i] += Complex64::new(1e-8 * r, 1e-8 * r);
                continue;
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-14 * r {
            break;
        }
    }
    [z[0], z[1], z[2], z[3]]
}

/// Spectrum of one block: four branches with eigenvectors, dual-route
/// verified.
///
/// The constructive route solves `λ̃² u = (C² - V0 D) u` and rebuilds the
/// 4-vector via `v = (C - λ̃)u / V0`; the direct route takes the roots of
/// the characteristic polynomial of `M` itself. The two spectra must agree
/// to `1e-10` relative, and every eigenpair must satisfy
/// `‖Mx - λ̃x‖ <= 1e-9 ‖M‖`.
pub fn eigen_block(
    block: &VariationalBlock,
    p: &PhysicalParams,
) -> Result<Vec<QuasiparticleBranch>, VariationalError> {
    let a = block.c * block.c - block.d * Complex64::from(block.v0);
    let (mu_a, mu_b) = eig2(&a);
    // series 1 = larger |λ̃²| family by real part, ties by imaginary part
    let (mu1, mu2) = if (mu_a.re, mu_a.im) >= (mu_b.re, mu_b.im) { (mu_a, mu_b) } else { (mu_b, mu_a) };

    let m_norm = frob(&block.m);
    let scale = m_norm * m_norm;

    // direct route: roots of det(M - λ̃) from M alone
    let direct = quartic_roots(char_poly(&block.m));
    let mut max_err = 0.0_f64;
    for lam in direct {
        let sq = lam * lam;
        let err = (sq - mu1).norm().min((sq - mu2).norm());
        max_err = max_err.max(err);
    }
    let tol = 1e-10 * scale.max(1.0);
    if max_err > tol {
        return Err(VariationalError::SpectrumMismatch { max_err: max_err / scale.max(1.0) });
    }

    let drift_term = drift(block.k1, block.k2, block.l, p);
    let mut branches = Vec::with_capacity(4);
    for (series, mu) in [(1u8, mu1), (2u8, mu2)] {
        let u = null_vector(&a, mu);
        let root = mu.sqrt();
        for sign in [1i8, -1i8] {
            let lt = if sign == 1 { root } else { -root };
            let v = (block.c - C2::from_diagonal_element(lt)) * u / Complex64::from(block.v0);
            let x = na::Vector4::new(u[0], u[1], v[0], v[1]);
            let xn = x.norm();
            let residual = (block.m * x - x * lt).norm();
            let tolerance = 1e-9 * m_norm.max(1e-300) * xn;
            if residual > tolerance {
                return Err(VariationalError::NonConvergence {
                    residual,
                    tolerance,
                    condition: m_norm / mu1.norm().max(1e-300),
                });
            }
            let is_complex = lt.im.abs() > 1e-10 * m_norm.max(1.0);
            let spurious = block.degenerate
                && (x[0] + x[1]).norm_sqr() + (x[2] + x[3]).norm_sqr() <= 1e-20 * xn * xn;
            let selected = !spurious && selection_rule(&x);
            branches.push(QuasiparticleBranch {
                series,
                k1: block.k1,
                k2: block.k2,
                l: block.l,
                lambda_tilde: lt,
                lambda: lt - Complex64::from(drift_term),
                sign,
                selected,
                complex: is_complex,
                spurious,
            });
        }
    }
    Ok(branches)
}

/// Closed-form branch energies in both published variants, with the
/// sign rules `+` for `l² > k2²` (branch 1) and `+` for `l1² > k2²`
/// (branch 2).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormBranches {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

/// Evaluates the closed form for branch energies.
///
/// `corrected` squares both terms under the inner radical,
/// `(l²-l1²)² + (4mV0/ħ²)²`, which is the form validated against the block
/// spectrum; the literal variant keeps them unsquared as published.
pub fn closed_form_branches(
    k1: LatticeVector,
    k2: LatticeVector,
    l: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    variant: MatrixVariant,
) -> ClosedFormBranches {
    let l1 = l + k2.scale(2);
    let k2sq = crate::geometry::norm_sq(wavevector(k2, p));
    let lsq = crate::geometry::norm_sq(wavevector(l, p));
    let l1sq = crate::geometry::norm_sq(wavevector(l1, p));
    let tau = p.hbar * p.hbar / (2.0 * p.mass);
    let inner = match variant {
        MatrixVariant::Corrected => {
            let a = lsq - l1sq;
            let b = 4.0 * p.mass * v0 / (p.hbar * p.hbar);
            Complex64::from(a * a + b * b).sqrt()
        }
        MatrixVariant::Literal => {
            Complex64::from((lsq - l1sq) + 4.0 * p.mass * v0 / (p.hbar * p.hbar)).sqrt()
        }
    };
    let common = Complex64::from(
        k2sq * k2sq + 0.5 * lsq * lsq + 0.5 * l1sq * l1sq - k2sq * (lsq + l1sq),
    );
    let cross = Complex64::from(0.5 * (lsq + l1sq - 2.0 * k2sq)) * inner;
    let d = drift(k1, k2, l, p);
    let s1 = if lsq >= k2sq { 1.0 } else { -1.0 };
    let s2 = if l1sq >= k2sq { 1.0 } else { -1.0 };
    ClosedFormBranches {
        lambda1: -d + s1 * tau * (common + cross).sqrt(),
        lambda2: -d + s2 * tau * (common - cross).sqrt(),
    }
}

/// Per-mode deviation between the closed form and the block spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormDeviation {
    pub l: LatticeVector,
    /// set distance between `{|λ̃| from closed form}` and the block values
    pub literal: f64,
    pub corrected: f64,
}

/// Compares both closed-form variants against the block spectrum (ground
/// truth) over the transverse lattice. The corrected variant should agree
/// to rounding; the literal one is reported as-is.
pub fn closed_form_discrepancy(
    k1: LatticeVector,
    k2: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    cutoff: i32,
    matrix_variant: MatrixVariant,
) -> Result<Vec<ClosedFormDeviation>, VariationalError> {
    let mut out = Vec::new();
    for l in crate::geometry::transverse_box(cutoff) {
        if l == -k2 {
            continue;
        }
        let block = build_block_limit(k1, k2, l, v0, p, matrix_variant)?;
        let branches = eigen_block(&block, p)?;
        // positive-sign intrinsic values of the two series
        let mut eigs: Vec<Complex64> = branches
            .iter()
            .filter(|b| b.sign == 1)
            .map(|b| b.lambda_tilde)
            .collect();
        eigs.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
        let dev = |variant: MatrixVariant| {
            let cf = closed_form_branches(k1, k2, l, v0, p, variant);
            let d0 = drift(k1, k2, l, p);
            let mut vals = [cf.lambda1 + Complex64::from(d0), cf.lambda2 + Complex64::from(d0)];
            // compare as sets of |λ̃|
            vals.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
            vals.iter()
                .zip(eigs.iter())
                .map(|(a, b)| (a.norm() - b.norm()).abs())
                .fold(0.0, f64::max)
        };
        out.push(ClosedFormDeviation {
            l,
            literal: dev(MatrixVariant::Literal),
            corrected: dev(MatrixVariant::Corrected),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesClass {
    Bogoliubov,
    Metastable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    NegativeSelected,
    ComplexBranch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub l: LatticeVector,
    pub lambda: Complex64,
    pub kind: EvidenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: SeriesClass,
    /// For the `k2 = 0` series: all selected branches nonnegative.
    pub metastable: bool,
    pub min_selected_lambda: f64,
    pub evidence: Vec<Evidence>,
    pub modes_scanned: usize,
}

/// Scans the lattice within `cutoff` (all three axes) and classifies the
/// `(k1, k2)` series by the sign and realness of the selected branches.
pub fn classify_series(
    k1: LatticeVector,
    k2: LatticeVector,
    v0: f64,
    p: &PhysicalParams,
    cutoff: i32,
    variant: MatrixVariant,
) -> Result<Classification, VariationalError> {
    if cutoff < 1 {
        return Err(VariationalError::EmptyScan { cutoff });
    }
    let mut evidence = Vec::new();
    let mut min_selected = f64::INFINITY;
    let mut scanned = 0usize;
    for l in crate::geometry::lattice_box(cutoff, cutoff) {
        if l == -k2 {
            continue;
        }
        let block = build_block_limit(k1, k2, l, v0, p, variant)?;
        let branches = eigen_block(&block, p)?;
        scanned += 1;
        for b in branches {
            if b.spurious {
                continue;
            }
            if b.complex {
                if b.selected || block.complex_phi {
                    evidence.push(Evidence { l, lambda: b.lambda, kind: EvidenceKind::ComplexBranch });
                }
                continue;
            }
            if b.selected {
                min_selected = min_selected.min(b.lambda.re);
                if b.lambda.re < -1e-10 {
                    evidence.push(Evidence { l, lambda: b.lambda, kind: EvidenceKind::NegativeSelected });
                }
            }
        }
    }
    evidence.sort_by(|a, b| {
        a.lambda
            .re
            .partial_cmp(&b.lambda.re)
            .unwrap()
            .then(a.l.cmp(&b.l))
    });
    let metastable = evidence.is_empty();
    let class = if k2.is_zero() {
        SeriesClass::Bogoliubov
    } else if metastable {
        SeriesClass::Metastable
    } else {
        SeriesClass::Unstable
    };
    Ok(Classification {
        class,
        metastable,
        min_selected_lambda: min_selected,
        evidence,
        modes_scanned: scanned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    // 2π/L2 = 1: transverse wavevectors are integer pairs
    fn int_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 2.0 * PI, 2.0 * PI, 1).unwrap()
    }

    fn eps_bogoliubov(t: f64, v0: f64) -> f64 {
        ((t + v0) * (t + v0) - v0 * v0).sqrt()
    }

    #[test]
    fn b_coeff_values() {
        let p = int_params();
        // l² = k2²: kinetic part zero, φ = 1/2 -> V0/2
        let k2 = LatticeVector::transverse(1, 0);
        let v = b_coeff(k2, k2, 0.8, &p, Complex64::from(0.5));
        assert_relative_eq!(v.re, 0.4, max_relative = 1e-14);
        // k2 = 0, l² = 8, φ = (-3 + 2√2)/2: B = 4 + φ
        let l = LatticeVector::transverse(2, 2);
        let phi = Complex64::from((-3.0 + 8.0_f64.sqrt()) / 2.0);
        let b = b_coeff(l, LatticeVector::ZERO, 1.0, &p, phi);
        assert_relative_eq!(b.re, 3.914213562373095, max_relative = 1e-12);
        assert_eq!(b.im, 0.0);
    }

    #[test]
    fn literal_block_matches_published_layout() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        let l = LatticeVector::transverse(3, 0);
        let v0 = 0.9;
        let block = build_block_limit(LatticeVector::ZERO, k2, l, v0, &p, MatrixVariant::Literal).unwrap();
        let phi_l = phi_limit(k2, l, v0, &p).value;
        let phi_l1 = phi_limit(k2, block.l1, v0, &p).value;
        let t_l = kinetic_diff(k2, l, &p);
        let t_l1 = kinetic_diff(k2, block.l1, &p);
        assert_eq!(block.c[(0, 0)], Complex64::from(t_l) + v0 * phi_l);
        assert_eq!(block.c[(1, 1)], Complex64::from(t_l1) + v0 * phi_l1);
        assert_eq!(block.c[(0, 1)], Complex64::from(v0));
        assert_eq!(block.d[(0, 0)], 2.0 * v0 * phi_l);
        assert_eq!(block.d[(1, 1)], 2.0 * v0 * phi_l1);
        assert_eq!(block.d[(0, 1)], v0 * (phi_l + phi_l1));
        assert_eq!(block.d[(0, 1)], block.d[(1, 0)]);
        // top-right block is exactly -V0·I
        assert_eq!(block.m[(0, 2)], Complex64::from(-v0));
        assert_eq!(block.m[(1, 3)], Complex64::from(-v0));
        assert_eq!(block.m[(0, 3)], Complex64::from(0.0));
        assert_eq!(block.m[(1, 2)], Complex64::from(0.0));
        // trace is exactly zero
        assert_eq!(block.m.trace(), Complex64::from(0.0));
    }

    #[test]
    fn excluded_mode_rejected() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        assert!(matches!(
            build_block_limit(LatticeVector::ZERO, k2, -k2, 1.0, &p, MatrixVariant::Corrected),
            Err(VariationalError::ExcludedMode { .. })
        ));
    }

    #[test]
    fn corrected_reduction_collapses_to_kinetic_form() {
        // C² - V0 D = [[T², V0(T+T')], [V0(T+T'), T'²]] exactly on the
        // corrected variant, for real and complex coefficients alike
        let p = int_params();
        let v0 = 1.1;
        let k2 = LatticeVector::transverse(1, 0);
        for l in [LatticeVector::transverse(3, 0), LatticeVector::transverse(1, 1), LatticeVector::transverse(0, 0)] {
            let block = build_block_limit(LatticeVector::ZERO, k2, l, v0, &p, MatrixVariant::Corrected).unwrap();
            let a = block.c * block.c - block.d * Complex64::from(v0);
            let t = kinetic_diff(k2, l, &p);
            let t1 = kinetic_diff(k2, block.l1, &p);
            assert!((a[(0, 0)] - Complex64::from(t * t)).norm() < 1e-12);
            assert!((a[(1, 1)] - Complex64::from(t1 * t1)).norm() < 1e-12);
            assert!((a[(0, 1)] - Complex64::from(v0 * (t + t1))).norm() < 1e-12);
            assert!(a[(0, 0)].im.abs() < 1e-13);
        }
    }

    #[test]
    fn k2_zero_selected_branch_is_bogoliubov() {
        let p = int_params();
        let v0 = 1.0;
        for (n2, n3) in [(2, 2), (3, 0), (4, 1), (2, 0)] {
            let l = LatticeVector::transverse(n2, n3);
            let block =
                build_block_limit(LatticeVector::ZERO, LatticeVector::ZERO, l, v0, &p, MatrixVariant::Corrected)
                    .unwrap();
            let branches = eigen_block(&block, &p).unwrap();
            let selected: Vec<_> = branches.iter().filter(|b| b.selected && !b.complex).collect();
            assert_eq!(selected.len(), 1, "modes {n2},{n3}: {branches:?}");
            let t = p.kinetic(wavevector(l, &p));
            assert_relative_eq!(selected[0].lambda_tilde.re, eps_bogoliubov(t, v0), max_relative = 1e-12);
        }
    }

    #[test]
    fn literal_variant_does_not_reduce_to_bogoliubov() {
        let p = int_params();
        let v0 = 1.0;
        let l = LatticeVector::transverse(2, 2); // T = 4, real branch
        let block =
            build_block_limit(LatticeVector::ZERO, LatticeVector::ZERO, l, v0, &p, MatrixVariant::Literal).unwrap();
        let branches = eigen_block(&block, &p).unwrap();
        let eps = eps_bogoliubov(4.0, v0);
        let closest = branches
            .iter()
            .map(|b| (b.lambda_tilde.re - eps).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest > 1e-3, "literal spectrum unexpectedly matches: {closest}");
    }

    #[test]
    fn plus_minus_pairing_and_trace() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        for l in [LatticeVector::transverse(3, 1), LatticeVector::transverse(0, 2)] {
            let block = build_block_limit(LatticeVector::ZERO, k2, l, 0.7, &p, MatrixVariant::Corrected).unwrap();
            let branches = eigen_block(&block, &p).unwrap();
            let sum: Complex64 = branches.iter().map(|b| b.lambda_tilde).sum();
            assert!(sum.norm() < 1e-10, "sum of eigenvalues {sum}");
        }
    }

    #[test]
    fn negative_mu_flagged_complex() {
        // k2 = 0, 0 < T < 2V0 puts the antisymmetric channel at μ < 0
        let p = int_params();
        let l = LatticeVector::transverse(1, 0); // T = 0.5, V0 = 1
        let block =
            build_block_limit(LatticeVector::ZERO, LatticeVector::ZERO, l, 1.0, &p, MatrixVariant::Corrected)
                .unwrap();
        let branches = eigen_block(&block, &p).unwrap();
        let complex_count = branches.iter().filter(|b| b.complex).count();
        assert_eq!(complex_count, 2, "{branches:?}");
        for b in branches.iter().filter(|b| b.complex) {
            assert!(b.lambda_tilde.re.abs() < 1e-10, "purely imaginary pair expected");
        }
    }

    #[test]
    fn selection_functional_basics() {
        let e1 = na::Vector4::new(
            Complex64::from(1.0),
            Complex64::from(0.0),
            Complex64::from(0.0),
            Complex64::from(0.0),
        );
        assert!(selection_rule(&e1));
        let e3 = na::Vector4::new(
            Complex64::from(0.0),
            Complex64::from(0.0),
            Complex64::from(1.0),
            Complex64::from(0.0),
        );
        assert!(!selection_rule(&e3));
    }

    #[test]
    fn exactly_one_selected_per_pair_on_real_blocks() {
        let p = int_params();
        let v0 = 0.4;
        let k2 = LatticeVector::transverse(1, 0);
        let mut checked = 0;
        for l in crate::geometry::transverse_box(4) {
            if l == -k2 {
                continue;
            }
            let block = build_block_limit(LatticeVector::ZERO, k2, l, v0, &p, MatrixVariant::Corrected).unwrap();
            if block.complex_phi {
                continue;
            }
            let branches = eigen_block(&block, &p).unwrap();
            if branches.iter().any(|b| b.complex) {
                continue;
            }
            checked += 1;
            for series in [1u8, 2u8] {
                let sel = branches
                    .iter()
                    .filter(|b| b.series == series && b.selected)
                    .count();
                assert_eq!(sel, 1, "series {series} of l = {l}: {branches:?}");
            }
        }
        assert!(checked > 10, "too few real blocks checked: {checked}");
    }

    #[test]
    fn determinant_identity() {
        let p = int_params();
        let k2 = LatticeVector::transverse(2, 0);
        let block = build_block_limit(LatticeVector::ZERO, k2, LatticeVector::transverse(4, 1), 0.6, &p, MatrixVariant::Corrected).unwrap();
        let det_m = block.m.determinant();
        let a = block.c * block.c - block.d * Complex64::from(block.v0);
        let det_a = a.determinant();
        assert!((det_m - det_a).norm() <= 1e-8 * det_a.norm().max(1.0));
    }

    #[test]
    fn drift_covariance_exact() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        let l = LatticeVector::transverse(3, 0);
        let k1 = LatticeVector::longitudinal(2);
        let b0 = build_block_limit(LatticeVector::ZERO, k2, l, 0.9, &p, MatrixVariant::Corrected).unwrap();
        let b1 = build_block_limit(k1, k2, l, 0.9, &p, MatrixVariant::Corrected).unwrap();
        let e0 = eigen_block(&b0, &p).unwrap();
        let e1 = eigen_block(&b1, &p).unwrap();
        let d = drift(k1, k2, l, &p);
        for (x, y) in e0.iter().zip(e1.iter()) {
            assert_eq!(y.lambda, x.lambda - Complex64::from(d));
            assert_eq!(y.lambda_tilde, x.lambda_tilde);
        }
        // closed form shares the same drift
        let c0 = closed_form_branches(LatticeVector::ZERO, k2, l, 0.9, &p, MatrixVariant::Corrected);
        let c1 = closed_form_branches(k1, k2, l, 0.9, &p, MatrixVariant::Corrected);
        assert!((c1.lambda1 - (c0.lambda1 - Complex64::from(d))).norm() < 1e-12);
        assert!((c1.lambda2 - (c0.lambda2 - Complex64::from(d))).norm() < 1e-12);
    }

    #[test]
    fn corrected_closed_form_matches_blocks() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        let devs = closed_form_discrepancy(
            LatticeVector::ZERO,
            k2,
            0.8,
            &p,
            4,
            MatrixVariant::Corrected,
        )
        .unwrap();
        for d in &devs {
            assert!(d.corrected < 1e-10, "corrected deviates at l = {}: {}", d.l, d.corrected);
        }
        // and the literal form genuinely differs somewhere
        let max_literal = devs.iter().map(|d| d.literal).fold(0.0, f64::max);
        assert!(max_literal > 1e-3, "literal unexpectedly matches: {max_literal}");
    }

    #[test]
    fn k2_zero_closed_form_reduces_to_bogoliubov() {
        let p = int_params();
        let v0 = 1.0;
        for l in [LatticeVector::transverse(2, 2), LatticeVector::transverse(3, 1)] {
            let cf = closed_form_branches(LatticeVector::ZERO, LatticeVector::ZERO, l, v0, &p, MatrixVariant::Corrected);
            let t = p.kinetic(wavevector(l, &p));
            assert_relative_eq!(cf.lambda1.re, eps_bogoliubov(t, v0), max_relative = 1e-12);
        }
    }

    #[test]
    fn classify_transverse_series_is_unstable() {
        let p = int_params();
        let k2 = LatticeVector::transverse(1, 0);
        let c = classify_series(LatticeVector::ZERO, k2, 1.0, &p, 3, MatrixVariant::Corrected).unwrap();
        assert_eq!(c.class, SeriesClass::Unstable);
        assert!(!c.evidence.is_empty());
    }

    #[test]
    fn classify_k2_zero_at_rest_is_bogoliubov_nonnegative() {
        let p = int_params();
        let c = classify_series(LatticeVector::ZERO, LatticeVector::ZERO, 1.0, &p, 3, MatrixVariant::Corrected).unwrap();
        assert_eq!(c.class, SeriesClass::Bogoliubov);
        assert!(c.metastable, "evidence: {:?}", c.evidence);
        assert!(c.min_selected_lambda >= -1e-12);
    }

    #[test]
    fn classify_k2_zero_fast_flow_goes_negative() {
        // long box: Landau velocity ~ sound speed; push the flow well past it
        let p = PhysicalParams::new(1.0, 1.0, 50.0, 2.0 * PI, 1).unwrap();
        let v0 = 1.0;
        let k1 = LatticeVector::longitudinal(20); // v = ħk1/m = 2π·20/50 ≈ 2.5 > sqrt(V0) = 1
        let c = classify_series(k1, LatticeVector::ZERO, v0, &p, 3, MatrixVariant::Corrected).unwrap();
        assert_eq!(c.class, SeriesClass::Bogoliubov);
        assert!(!c.metastable);
        assert!(c.min_selected_lambda < 0.0);
    }
}
