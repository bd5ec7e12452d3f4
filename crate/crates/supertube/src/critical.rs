//! Resonance analysis between the flowing series and the transverse
//! standing-wave series, and the resulting superfluidity criterion
//! `v_critical = min(v_landau, 2πħ/(m L2))`.
//!
//! Exact resonance between a flow mode `k0 = 2π(n1/L1,0,0)` and a pair
//! state `(k1, k2)` is the integer condition `k0² = k1² + k2²` (the
//! potential terms cancel); the scan also reports near-resonances within a
//! relative energy tolerance. Hits with `k2 = 0` are the flowing series
//! itself and are excluded.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bogoliubov::{landau_velocity, BogoliubovError, LandauReport};
use crate::geometry::{LatticeVector, PhysicalParams};
use crate::pairseries::leading_energy;
use crate::potential::FourierTable;

#[derive(Debug, Error, PartialEq)]
pub enum CriticalError {
    #[error("flow mode must be longitudinal, got {k0}")]
    NotLongitudinal { k0: LatticeVector },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("scan produced no flow modes: v_max {v_max} admits none on this box")]
    EmptyScan { v_max: f64 },
    #[error(transparent)]
    Bogoliubov(#[from] BogoliubovError),
}

/// Leading flow energy `N(ħ²k0²/2m + V0/2)` of the running series.
pub fn flow_energy(
    k0: LatticeVector,
    p: &PhysicalParams,
    v0: f64,
) -> Result<f64, CriticalError> {
    if !k0.is_longitudinal() {
        return Err(CriticalError::NotLongitudinal { k0 });
    }
    Ok(leading_energy(k0, LatticeVector::ZERO, p, v0))
}

/// Minimal energy of the transverse series, attained at `k = 2π(0,1/L2,0)`:
/// `N(ħ²(2π)²/(2mL2²) + V0/2)`.
pub fn min_metastable_energy(p: &PhysicalParams, v0: f64) -> f64 {
    leading_energy(LatticeVector::ZERO, LatticeVector::transverse(1, 0), p, v0)
}

/// Geometric critical velocity `v_c(L2) = 2πħ/(m L2) = h/(m L2)`.
pub fn geometric_critical_velocity(p: &PhysicalParams) -> f64 {
    2.0 * std::f64::consts::PI * p.hbar / (p.mass * p.l2)
}

/// One energy match between the flowing and transverse series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceHit {
    pub k0: LatticeVector,
    pub k1: LatticeVector,
    pub k2: LatticeVector,
    pub e_flow: f64,
    pub e_pair: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

/// Best rational `p/q` for `x` by continued fractions with `q <= q_max`.
fn rational_approx(x: f64, q_max: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a < 0.0 || a > u64::MAX as f64 {
            break;
        }
        let a_int = a as u64;
        let p2 = a_int.saturating_mul(p1).saturating_add(p0);
        let q2 = a_int.saturating_mul(q1).saturating_add(q0);
        if q2 > q_max {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    (p1, q1.max(1))
}

/// Enumerates flow modes with `|ħ k0/m| <= v_max` and transverse pair
/// states within `cutoff`, reporting energy matches.
///
/// `tolerance = 0` switches to exact integer arithmetic on the mode
/// numbers: with `L1/L2 = p/q` the condition is
/// `(n1² - n1'²) q² = (n2² + n3²) p²`. Scanned mode numbers are
/// canonicalized to `n1 >= 1`, `n1' >= 0`, `n2, n3 >= 0`, `(n2,n3) != 0`.
pub fn resonance_scan(
    p: &PhysicalParams,
    v0: f64,
    v_max: f64,
    tolerance: f64,
    cutoff: i32,
) -> Result<Vec<ResonanceHit>, CriticalError> {
    if !(v_max > 0.0) {
        return Err(CriticalError::InvalidScan(format!("v_max must be > 0, got {v_max}")));
    }
    if !(0.0..1.0).contains(&tolerance) {
        return Err(CriticalError::InvalidScan(format!(
            "tolerance must lie in [0, 1), got {tolerance}"
        )));
    }
    if cutoff < 1 {
        return Err(CriticalError::InvalidScan(format!("cutoff must be >= 1, got {cutoff}")));
    }
    // |ħ 2π n1 / (m L1)| <= v_max
    let n1_max = (v_max * p.mass * p.l1 / (2.0 * std::f64::consts::PI * p.hbar)).floor() as i64;
    if n1_max < 1 {
        return Err(CriticalError::EmptyScan { v_max });
    }

    let exact = tolerance == 0.0;
    let (rat_p, rat_q) = rational_approx(p.l1 / p.l2, 1_000_000);

    let mut hits: Vec<ResonanceHit> = (1..=n1_max)
        .into_par_iter()
        .flat_map_iter(|n1| {
            let mut local = Vec::new();
            let k0 = LatticeVector::longitudinal(n1 as i32);
            let e_flow = leading_energy(k0, LatticeVector::ZERO, p, v0);
            for n1p in 0..=cutoff {
                let k1 = LatticeVector::longitudinal(n1p);
                for n2 in 0..=cutoff {
                    for n3 in 0..=cutoff {
                        if n2 == 0 && n3 == 0 {
                            continue;
                        }
                        let k2 = LatticeVector::transverse(n2, n3);
                        let matched = if exact {
                            let lhs = (n1 * n1 - (n1p as i64) * (n1p as i64)) as i128
                                * (rat_q as i128)
                                * (rat_q as i128);
                            let rhs = ((n2 as i128) * (n2 as i128) + (n3 as i128) * (n3 as i128))
                                * (rat_p as i128)
                                * (rat_p as i128);
                            lhs == rhs
                        } else {
                            let e_pair = leading_energy(k1, k2, p, v0);
                            (e_flow - e_pair).abs() <= tolerance * e_flow
                        };
                        if matched {
                            let e_pair = leading_energy(k1, k2, p, v0);
                            let gap = (e_flow - e_pair).abs();
                            local.push(ResonanceHit {
                                k0,
                                k1,
                                k2,
                                e_flow,
                                e_pair,
                                gap,
                                relative_gap: gap / e_flow,
                            });
                        }
                    }
                }
            }
            local
        })
        .collect();
    hits.sort_by(|a, b| {
        a.gap
            .partial_cmp(&b.gap)
            .unwrap()
            .then(a.k0.cmp(&b.k0))
            .then(a.k1.cmp(&b.k1))
            .then(a.k2.cmp(&b.k2))
    });
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    GeometryLimited,
    LandauLimited,
}

/// The superfluidity criterion `v_critical = min(v_landau, v_geometric)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalVelocityReport {
    pub v_landau: f64,
    pub landau_argmin: LatticeVector,
    pub continuum_bound: f64,
    pub v_geometric: f64,
    pub v_critical: f64,
    pub regime: Regime,
}

/// Combines the Landau scan with the geometric velocity.
pub fn critical_velocity(
    p: &PhysicalParams,
    table: &FourierTable,
    cutoff: i32,
) -> Result<CriticalVelocityReport, CriticalError> {
    let landau: LandauReport = landau_velocity(table, cutoff)?;
    let v_geometric = geometric_critical_velocity(p);
    let v_critical = landau.v_landau.min(v_geometric);
    let regime = if v_geometric < landau.v_landau {
        Regime::GeometryLimited
    } else {
        Regime::LandauLimited
    };
    Ok(CriticalVelocityReport {
        v_landau: landau.v_landau,
        landau_argmin: landau.argmin,
        continuum_bound: landau.continuum_bound,
        v_geometric,
        v_critical,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{FourierTable, PotentialSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(l1: f64, l2: f64, n: u64) -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, l1, l2, n).unwrap()
    }

    #[test]
    fn flow_energy_values() {
        let p = params(1.0, 1.0, 100);
        let v0 = 0.4;
        assert_relative_eq!(flow_energy(LatticeVector::ZERO, &p, v0).unwrap(), 100.0 * 0.2);
        // k0 = 2π/L1, L1 = 1: kinetic (2π)²/2 = 2π²
        let e = flow_energy(LatticeVector::longitudinal(1), &p, v0).unwrap();
        assert_relative_eq!(e, 100.0 * (2.0 * PI * PI + 0.2), max_relative = 1e-13);
        // equals the shared leading-energy formula with k2 = 0
        assert_eq!(e, leading_energy(LatticeVector::longitudinal(1), LatticeVector::ZERO, &p, v0));
        assert!(matches!(
            flow_energy(LatticeVector::transverse(1, 0), &p, v0),
            Err(CriticalError::NotLongitudinal { .. })
        ));
    }

    #[test]
    fn min_metastable_values() {
        let p = params(1.0, 1.0, 10);
        let e = min_metastable_energy(&p, 1.0);
        assert_relative_eq!(e, 10.0 * (2.0 * PI * PI + 0.5), max_relative = 1e-13);
        assert_eq!(e, leading_energy(LatticeVector::ZERO, LatticeVector::transverse(1, 0), &p, 1.0));
        // doubling L2 cuts the kinetic part by 4
        let p2 = params(1.0, 2.0, 10);
        let kin = min_metastable_energy(&p, 1.0) - 5.0;
        let kin2 = min_metastable_energy(&p2, 1.0) - 5.0;
        assert_relative_eq!(kin, 4.0 * kin2, max_relative = 1e-12);
    }

    #[test]
    fn geometric_velocity_values() {
        let p = params(1.0, 1.0, 1);
        assert_relative_eq!(geometric_critical_velocity(&p), 2.0 * PI);
        let p2 = params(1.0, 2.0, 1);
        assert_relative_eq!(
            geometric_critical_velocity(&p),
            2.0 * geometric_critical_velocity(&p2)
        );
        // L2 = 2R: equals h/(2mR)
        let radius = 0.7;
        let p3 = params(1.0, 2.0 * radius, 1);
        assert_relative_eq!(
            geometric_critical_velocity(&p3),
            p3.planck_h() / (p3.mass * 2.0 * radius),
            max_relative = 1e-15
        );
    }

    #[test]
    fn exact_resonance_on_commensurate_box() {
        // L1 = 10 L2: n1 = 10 resonates with k2 = 2π(0,1,0)/L2, k1 = 0
        let p = params(10.0, 1.0, 50);
        let hits = resonance_scan(&p, 0.3, 7.0, 0.0, 4).unwrap();
        assert!(hits
            .iter()
            .any(|h| h.k0 == LatticeVector::longitudinal(10)
                && h.k1 == LatticeVector::ZERO
                && h.k2 == LatticeVector::transverse(1, 0)));
        for h in &hits {
            assert!(h.gap < 1e-9 * h.e_flow);
        }
    }

    #[test]
    fn exact_scan_matches_integer_brute_force() {
        let p = params(10.0, 1.0, 50);
        let cutoff = 6;
        let v_max = 9.0;
        let hits = resonance_scan(&p, 0.3, v_max, 0.0, cutoff).unwrap();
        let mut expected = Vec::new();
        let n1_max = (v_max * p.l1 / (2.0 * PI)).floor() as i64;
        for n1 in 1..=n1_max {
            for n1p in 0..=cutoff as i64 {
                for n2 in 0..=cutoff as i64 {
                    for n3 in 0..=cutoff as i64 {
                        if (n2, n3) == (0, 0) {
                            continue;
                        }
                        // (n1² - n1'²) = (n2² + n3²)·(L1/L2)² with L1/L2 = 10
                        if n1 * n1 - n1p * n1p == (n2 * n2 + n3 * n3) * 100 {
                            expected.push((n1, n1p, n2, n3));
                        }
                    }
                }
            }
        }
        assert_eq!(hits.len(), expected.len());
        for (n1, n1p, n2, n3) in expected {
            assert!(hits.iter().any(|h| h.k0.n1 as i64 == n1
                && h.k1.n1 as i64 == n1p
                && h.k2.n2 as i64 == n2
                && h.k2.n3 as i64 == n3));
        }
    }

    #[test]
    fn no_hits_below_geometric_velocity() {
        let p = params(10.0, 1.0, 50);
        let v_geo = geometric_critical_velocity(&p);
        // scan only flows strictly below v_c(L2)
        let hits = resonance_scan(&p, 0.3, v_geo * 0.999, 0.0, 8).unwrap();
        assert!(hits.is_empty(), "{hits:?}");
        // and with a generous relative tolerance the gap floor still holds
        let near = resonance_scan(&p, 0.3, v_geo * 0.999, 1e-6, 8).unwrap();
        assert!(near.is_empty(), "{near:?}");
    }

    #[test]
    fn incommensurate_box_has_no_small_hits() {
        let p = params(10.0 * 2.0_f64.sqrt(), 1.0, 50);
        let hits = resonance_scan(&p, 0.3, 6.0, 1e-12, 6).unwrap();
        assert!(hits.is_empty(), "{hits:?}");
    }

    #[test]
    fn scan_validates_inputs() {
        let p = params(10.0, 1.0, 50);
        assert!(resonance_scan(&p, 0.3, 0.0, 0.0, 4).is_err());
        assert!(resonance_scan(&p, 0.3, 1.0, 1.5, 4).is_err());
        assert!(matches!(
            resonance_scan(&p, 0.3, 1e-6, 0.0, 4),
            Err(CriticalError::EmptyScan { .. })
        ));
    }

    fn table_with_v0(v0: f64, p: PhysicalParams) -> FourierTable {
        let a = 0.25 * p.l1.min(p.l2);
        let amp = v0 * p.volume() / (4.0 / 3.0 * PI * a * a * a);
        FourierTable::limit(PotentialSpec::tophat(amp, a).unwrap(), p).unwrap()
    }

    #[test]
    fn critical_velocity_is_min_and_regime_tags() {
        // long box, unit V0: v_landau ~ sqrt(V0) = 1, v_geo = 2π/L2
        let p_narrow = params(200.0, 0.5, 1); // v_geo = 4π >> v_landau
        let t = table_with_v0(1.0, p_narrow);
        let r = critical_velocity(&p_narrow, &t, 3).unwrap();
        assert_eq!(r.v_critical, r.v_landau.min(r.v_geometric));
        assert_eq!(r.regime, Regime::LandauLimited);

        let p_wide = params(200.0, 40.0, 1); // v_geo = 2π/40 ≈ 0.157 << v_landau
        let t2 = table_with_v0(1.0, p_wide);
        let r2 = critical_velocity(&p_wide, &t2, 3).unwrap();
        assert_eq!(r2.regime, Regime::GeometryLimited);
        assert_eq!(r2.v_critical, r2.v_geometric);
    }

    #[test]
    fn critical_velocity_dimensional_invariance() {
        // rescale ħ and m keeping ħ/(mL2) and sqrt(V0/m) fixed
        let p1 = PhysicalParams::new(1.0, 1.0, 50.0, 2.0, 1).unwrap();
        let t1 = table_with_v0(0.09, p1);
        let r1 = critical_velocity(&p1, &t1, 2).unwrap();

        let scale = 3.0;
        let p2 = PhysicalParams::new(scale, scale, 50.0, 2.0, 1).unwrap();
        let t2 = table_with_v0(0.09 * scale, p2);
        let r2 = critical_velocity(&p2, &t2, 2).unwrap();
        assert_relative_eq!(r1.v_critical, r2.v_critical, max_relative = 1e-9);
        assert_relative_eq!(r1.v_geometric, r2.v_geometric, max_relative = 1e-12);
    }
}
